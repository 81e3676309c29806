#pragma once
#include <stdexcept>
#include <string>

namespace thermores {

// Precondition violations on library operations. The CLI maps these to
// exit code 2 when they occur during config validation, 1 afterwards.
struct value_error : std::invalid_argument {
    explicit value_error(const std::string& msg) : std::invalid_argument(msg) {}
};

// Config-file problems; carries the offending field so the CLI can print a
// field-level message.
struct config_error : std::runtime_error {
    std::string field;
    config_error(std::string field_, const std::string& msg)
        : std::runtime_error("config field '" + field_ + "': " + msg), field(std::move(field_)) {}
};

}

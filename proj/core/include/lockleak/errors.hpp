#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace lockleak {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed or invalid user input (files, parameters). The CLI maps this to exit code 2.
class InputError : public Error {
public:
    using Error::Error;
};

class UnsupportedFeature : public InputError {
public:
    using InputError::InputError;
};

// An enumeration-based routine was asked to handle more bits than it is bounded for.
class BoundsError : public InputError {
public:
    using InputError::InputError;
};

class CycleError : public Error {
public:
    CycleError(const std::string& what, std::vector<std::uint32_t> loop)
        : Error(what), loop_nets(std::move(loop)) {}
    std::vector<std::uint32_t> loop_nets;
};

// D-MUX ran out of insertion retries.
class CapacityError : public Error {
public:
    CapacityError(const std::string& what, int placed_bits, int requested_bits)
        : Error(what), placed(placed_bits), requested(requested_bits) {}
    int placed;
    int requested;
};

// An internal consistency check failed (e.g. a leakage witness did not replay).
// Never caught by library code; the CLI maps it to exit code 3.
class SoundnessError : public Error {
public:
    using Error::Error;
};

} // namespace lockleak

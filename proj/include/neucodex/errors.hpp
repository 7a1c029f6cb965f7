#pragma once

#include <stdexcept>
#include <string>

namespace neucodex {

// Base for everything this library throws, so callers can catch in one clause.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Bad values fed to an operation (non-binary spike, shape mismatch, NaN input).
struct DomainError : Error {
    using Error::Error;
};

// Malformed serialized data: wrong lengths, nonzero padding bits.
struct FormatError : Error {
    using Error::Error;
};

// Wire contract violated: bad magic, unknown version/type, out-of-order
// timestep, trailing bytes.
struct ProtocolError : Error {
    using Error::Error;
};

// Incomplete message. Distinct from ProtocolError: retryable at the
// transport level once more bytes arrive.
struct FramingError : Error {
    using Error::Error;
};

// Channel/socket failure or use of a closed transport.
struct TransportError : Error {
    using Error::Error;
};

// Weights container failed its CRC or structural checks.
struct IntegrityError : Error {
    using Error::Error;
};

// HELLO digest mismatch between edge and cloud.
struct HandshakeError : Error {
    using Error::Error;
};

// Invalid experiment configuration.
struct ConfigError : Error {
    using Error::Error;
};

// Inconsistent rows handed to the report builder.
struct ReportError : Error {
    using Error::Error;
};

} // namespace neucodex

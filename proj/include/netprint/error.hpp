#ifndef NETPRINT_ERROR_HPP
#define NETPRINT_ERROR_HPP

#include <sstream>
#include <stdexcept>
#include <string>

namespace netprint {

/// Thrown when a caller breaks a documented precondition or shape contract.
class ContractViolation : public std::logic_error {
public:
    explicit ContractViolation(const std::string& what) : std::logic_error(what) {}
};

/// Filesystem-level failures: missing files, unreadable paths, empty traces.
class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed or truncated model files; carries the byte offset where parsing stopped.
class FormatError : public std::runtime_error {
public:
    FormatError(const std::string& what, std::size_t byte_offset)
        : std::runtime_error(what + " (at byte offset " + std::to_string(byte_offset) + ")"),
          offset(byte_offset) {}
    std::size_t offset;
};

namespace detail {
[[noreturn]] inline void contract_fail(const char* expr, const char* file, int line,
                                       const std::string& msg) {
    std::ostringstream os;
    os << "contract violation: " << msg << " [" << expr << " at " << file << ":" << line << "]";
    throw ContractViolation(os.str());
}
}  // namespace detail

}  // namespace netprint

#define NP_REQUIRE(cond, msg)                                                  \
    do {                                                                       \
        if (!(cond)) ::netprint::detail::contract_fail(#cond, __FILE__, __LINE__, (msg)); \
    } while (0)

#endif  // NETPRINT_ERROR_HPP

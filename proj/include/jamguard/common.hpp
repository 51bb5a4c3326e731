#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace jamguard {

using cplx = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;

/// Raised when an argument violates an operation's precondition.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Raised when a serialized artifact cannot be decoded. Carries the byte
/// (or line) offset at which decoding failed.
class FormatError : public std::runtime_error {
public:
    FormatError(const std::string& what, std::size_t offset)
        : std::runtime_error(what + " (at offset " + std::to_string(offset) + ")"),
          offset_(offset) {}

    std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Complex baseband sample stream.
struct IQBuffer {
    std::vector<cplx> samples;
    double sample_rate = 15.625e6;
    double center_freq = 632e6;

    std::size_t size() const noexcept { return samples.size(); }
    bool empty() const noexcept { return samples.empty(); }
};

enum class Label : std::uint8_t { pure = 0, jammed = 1 };

inline const char* label_name(Label l) { return l == Label::jammed ? "jammed" : "pure"; }

Label parse_label(const std::string& s);

/// Mean power of the samples; zero for an empty range.
double mean_power(const std::vector<cplx>& x);

}  // namespace jamguard

#pragma once

#include <cstddef>
#include <cstdio>
#include <stdexcept>
#include <string>

namespace micromaser {

namespace detail {

inline std::string sci3(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3e", v);
    return buf;
}

}  // namespace detail

/// Base class for every error raised by the library.
class MicromaserError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// The truncated basis discards more thermal weight than allowed.
class CutoffTooSmall : public MicromaserError {
public:
    CutoffTooSmall(std::size_t cutoff, double tail)
        : MicromaserError("cutoff " + std::to_string(cutoff) +
                          " too small: discarded thermal tail " + detail::sci3(tail)),
          cutoff_(cutoff), tail_(tail) {}

    std::size_t cutoff() const noexcept { return cutoff_; }
    double tail() const noexcept { return tail_; }

private:
    std::size_t cutoff_;
    double tail_;
};

/// One atom passage lost more probability through the cutoff than allowed.
class LeakageExceeded : public MicromaserError {
public:
    explicit LeakageExceeded(double leakage, std::size_t atom_index = 0)
        : MicromaserError("trace leakage " + detail::sci3(leakage) +
                          (atom_index ? " at atom " + std::to_string(atom_index) : std::string{})),
          leakage_(leakage), atom_index_(atom_index) {}

    double leakage() const noexcept { return leakage_; }
    std::size_t atom_index() const noexcept { return atom_index_; }

private:
    double leakage_;
    std::size_t atom_index_;
};

/// g2(0) has no meaning for a state with (numerically) zero photons.
class UndefinedForVacuum : public MicromaserError {
public:
    UndefinedForVacuum() : MicromaserError("g2(0) undefined: mean photon number is zero") {}
};

/// Q-function grid reaches coherent amplitudes the truncated basis cannot represent.
class GridOutsideTruncation : public MicromaserError {
public:
    GridOutsideTruncation(double max_beta_sq, std::size_t cutoff)
        : MicromaserError("Q grid reaches |beta|^2 = " + detail::sci3(max_beta_sq) +
                          " beyond half the cutoff " + std::to_string(cutoff)) {}
};

/// Malformed or unknown configuration input.
class ConfigError : public MicromaserError {
public:
    using MicromaserError::MicromaserError;
};

}  // namespace micromaser

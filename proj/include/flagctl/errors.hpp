#pragma once

#include <stdexcept>
#include <string>

namespace flagctl {

// Structured error categories. The CLI maps Code::config to exit code 2;
// everything else aborts with a message naming the failing stage.
class Error : public std::runtime_error {
public:
    enum class Code {
        dimension,   // shape / size mismatch
        domain,      // value precondition violated (trace, dt, theta index, ...)
        chamber,     // Cartan element not in the closed chamber
        range,       // control outside the admissible range
        not_split,   // matrix has no all-real eigendecomposition
        singular,    // numerically singular group element
        resolution,  // discretization too small
        projection,  // flag projection between incompatible types
        label,       // inconsistent Weyl representative list
        labeling,    // core point not covered by any computed set
        structure,   // label stabilizer is not a standard parabolic subgroup
        config,      // bad run configuration / input file
    };

    Error(Code code, const std::string& what)
        : std::runtime_error(what), code_(code) {}

    Code code() const noexcept { return code_; }

private:
    Code code_;
};

[[noreturn]] inline void fail(Error::Code code, const std::string& msg) {
    throw Error(code, msg);
}

inline void require(bool cond, Error::Code code, const std::string& msg) {
    if (!cond) fail(code, msg);
}

} // namespace flagctl

#pragma once

#include <chrono>
#include <stdexcept>

namespace cchm {

class TimeoutError : public std::runtime_error {
public:
    TimeoutError() : std::runtime_error("time limit exceeded") {}
};

/// Wall-clock budget shared by the phases of one run. A non-positive budget never expires.
class Deadline {
public:
    Deadline() = default;
    explicit Deadline(double seconds)
        : limited_(seconds > 0.0),
          end_(std::chrono::steady_clock::now() +
               std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                   std::chrono::duration<double>(seconds > 0.0 ? seconds : 0.0))) {}

    bool expired() const { return limited_ && std::chrono::steady_clock::now() >= end_; }
    void check() const {
        if (expired()) throw TimeoutError();
    }

private:
    bool limited_ = false;
    std::chrono::steady_clock::time_point end_{};
};

}  // namespace cchm

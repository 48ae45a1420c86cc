#pragma once

#include <optional>
#include <stdexcept>
#include <utility>
#include <variant>

namespace ipu {

// Minimal result type for data-path errors (corrupt frames, failed transfers).
// Configuration and programmer errors throw instead.
template <typename T, typename E>
class Expected {
public:
    Expected(T value) : value_(std::in_place_index<0>, std::move(value)) {}
    Expected(E error) : value_(std::in_place_index<1>, std::move(error)) {}

    bool ok() const { return value_.index() == 0; }
    explicit operator bool() const { return ok(); }

    T& value() & {
        require_ok();
        return std::get<0>(value_);
    }
    const T& value() const& {
        require_ok();
        return std::get<0>(value_);
    }
    T&& value() && {
        require_ok();
        return std::get<0>(std::move(value_));
    }

    const E& error() const {
        if (ok()) throw std::logic_error("Expected holds a value, not an error");
        return std::get<1>(value_);
    }

    T* operator->() { return &value(); }
    const T* operator->() const { return &value(); }
    T& operator*() & { return value(); }
    const T& operator*() const& { return value(); }

private:
    void require_ok() const {
        if (!ok()) throw std::logic_error("Expected holds an error, not a value");
    }
    std::variant<T, E> value_;
};

// Operations that succeed without producing a value; default-constructed
// means success.
template <typename E>
class Expected<void, E> {
public:
    Expected() = default;
    Expected(E error) : error_(std::move(error)) {}

    bool ok() const { return !error_.has_value(); }
    explicit operator bool() const { return ok(); }

    const E& error() const {
        if (ok()) throw std::logic_error("Expected holds a value, not an error");
        return *error_;
    }

private:
    std::optional<E> error_;
};

}  // namespace ipu

#pragma once

#include <string>
#include <utility>

// Runs fn, returns the caught E's message; empty when fn does not throw E.
template <class E, class F>
std::string thrown_message(F&& fn) {
    try {
        std::forward<F>(fn)();
    } catch (const E& e) {
        return e.what();
    } catch (...) {
    }
    return {};
}

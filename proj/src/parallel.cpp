#include "levyflow/parallel.hpp"

namespace levyflow {

namespace {

std::atomic<unsigned> g_threads{0};

} // namespace

void set_thread_count(unsigned n) { g_threads = n; }

unsigned thread_count() {
    if (const unsigned n = g_threads; n != 0) return n;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

} // namespace levyflow

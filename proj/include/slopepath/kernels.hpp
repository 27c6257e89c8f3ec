#pragma once

#include <slopepath/types.hpp>

#include <cstdint>
#include <functional>

// Data-parallel kernels. Each has a serial reference kept for tests and
// benchmarks; the dispatching entry point picks the OpenMP version when more
// than one thread is requested.
namespace slopepath::kernels {

/// out = Xᵀv, one dot product per column.
void xt_times_serial(const Matrix& X, const Vector& v, Vector& out);
void xt_times_parallel(const Matrix& X, const Vector& v, Vector& out, int threads);
void xt_times(const Matrix& X, const Vector& v, Vector& out, int threads);

/// Xᵀ(Xβ − y) + ridge·β.
Vector quadratic_gradient_serial(const ProblemInstance& instance, const Vector& beta);
Vector quadratic_gradient_parallel(const ProblemInstance& instance, const Vector& beta, int threads);

/// Runs body(i) for i in [0, count). Results must be written to per-index
/// slots; the call is deterministic whenever body(i) only depends on i.
void for_each_index(std::int64_t count, int threads, const std::function<void(std::int64_t)>& body);

/// Number of threads OpenMP would use by default (1 without OpenMP).
int available_threads();

} // namespace slopepath::kernels

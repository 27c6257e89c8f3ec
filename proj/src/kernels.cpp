#include <slopepath/kernels.hpp>

#include <exception>
#include <mutex>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace slopepath::kernels {

void xt_times_serial(const Matrix& X, const Vector& v, Vector& out)
{
    const Eigen::Index n = X.rows();
    const Eigen::Index p = X.cols();
    out.resize(p);
    for (Eigen::Index j = 0; j < p; ++j) {
        const double* col = X.data() + j * n;
        double acc = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) acc += col[i] * v[i];
        out[j] = acc;
    }
}

void xt_times_parallel(const Matrix& X, const Vector& v, Vector& out, int threads)
{
    const Eigen::Index n = X.rows();
    const Eigen::Index p = X.cols();
    out.resize(p);
    const double* vp = v.data();
    double* op = out.data();
#pragma omp parallel for num_threads(threads) schedule(static)
    for (Eigen::Index j = 0; j < p; ++j) {
        const double* col = X.data() + j * n;
        double acc = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) acc += col[i] * vp[i];
        op[j] = acc;
    }
    (void)threads;
}

void xt_times(const Matrix& X, const Vector& v, Vector& out, int threads)
{
    if (threads > 1) {
        xt_times_parallel(X, v, out, threads);
    } else {
        xt_times_serial(X, v, out);
    }
}

Vector quadratic_gradient_serial(const ProblemInstance& instance, const Vector& beta)
{
    const Vector residual = instance.X * beta - instance.y;
    Vector grad;
    xt_times_serial(instance.X, residual, grad);
    if (instance.ridge != 0.0) grad += instance.ridge * beta;
    return grad;
}

Vector quadratic_gradient_parallel(const ProblemInstance& instance, const Vector& beta, int threads)
{
    const Vector residual = instance.X * beta - instance.y;
    Vector grad;
    xt_times_parallel(instance.X, residual, grad, threads);
    if (instance.ridge != 0.0) grad += instance.ridge * beta;
    return grad;
}

void for_each_index(std::int64_t count, int threads, const std::function<void(std::int64_t)>& body)
{
    if (threads <= 1) {
        for (std::int64_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::exception_ptr failure;
    std::mutex guard;
#pragma omp parallel for num_threads(threads) schedule(dynamic, 1)
    for (std::int64_t i = 0; i < count; ++i) {
        try {
            body(i);
        } catch (...) {
            std::lock_guard<std::mutex> lock(guard);
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);
}

int available_threads()
{
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

} // namespace slopepath::kernels

#pragma once

// Classic fixed-step fourth-order Runge-Kutta for small first-order systems.

#include <array>
#include <concepts>
#include <cstddef>
#include <utility>

namespace bubblesynth {

template <std::size_t N>
using OdeState = std::array<double, N>;

template <typename F, std::size_t N>
concept OdeRhs = requires(F f, double t, const OdeState<N>& y) {
    { f(t, y) } -> std::convertible_to<OdeState<N>>;
};

namespace detail {

template <std::size_t N>
constexpr OdeState<N> axpy(const OdeState<N>& y, double a, const OdeState<N>& k)
{
    OdeState<N> out{};
    for (std::size_t i = 0; i < N; ++i)
        out[i] = y[i] + a * k[i];
    return out;
}

}  // namespace detail

template <std::size_t N, OdeRhs<N> F>
OdeState<N> rk4_step(const OdeState<N>& y, double t, double h, F&& f)
{
    const OdeState<N> k1 = f(t, y);
    const OdeState<N> k2 = f(t + 0.5 * h, detail::axpy(y, 0.5 * h, k1));
    const OdeState<N> k3 = f(t + 0.5 * h, detail::axpy(y, 0.5 * h, k2));
    const OdeState<N> k4 = f(t + h, detail::axpy(y, h, k3));
    OdeState<N> out{};
    for (std::size_t i = 0; i < N; ++i)
        out[i] = y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    return out;
}

/// Integrates `steps` steps from t0 and calls observe(i, t_i, y_i) for i = 0..steps.
template <std::size_t N, OdeRhs<N> F, typename Observer>
OdeState<N> rk4_integrate(OdeState<N> y, double t0, double h, std::size_t steps, F&& f,
                          Observer&& observe)
{
    for (std::size_t i = 0;; ++i) {
        const double t = t0 + static_cast<double>(i) * h;
        observe(i, t, y);
        if (i == steps)
            break;
        y = rk4_step<N>(y, t, h, f);
    }
    return y;
}

template <std::size_t N, OdeRhs<N> F>
OdeState<N> rk4_integrate(OdeState<N> y, double t0, double h, std::size_t steps, F&& f)
{
    return rk4_integrate<N>(y, t0, h, steps, std::forward<F>(f),
                            [](std::size_t, double, const OdeState<N>&) {});
}

}  // namespace bubblesynth

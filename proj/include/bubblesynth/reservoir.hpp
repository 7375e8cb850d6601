#pragma once

// Reservoir computing with a single bubble as the physical node: time-multiplexed
// virtual neurons, ridge-regression readout, short-term-memory and parity-check
// capacities, and a reference echo state network for checking the readout machinery.

#include "bubblesynth/bubble_solver.hpp"
#include "bubblesynth/errors.hpp"
#include "bubblesynth/physics_params.hpp"
#include "bubblesynth/score_codec.hpp"
#include "bubblesynth/signal_analysis.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace bubblesynth {

enum class Activation { tanh, identity };

struct EsnConfig {
    int reservoir_size = 100;  // N_x
    int input_size = 1;        // N_u
    double leak = 1.0;         // alpha_r in (0, 1]
    double spectral_radius = 0.9;
    double input_scale = 1.0;
    double density = 1.0;
    std::uint64_t seed = 1;
    Activation activation = Activation::tanh;

    void validate() const
    {
        detail::require(reservoir_size >= 1, "reservoir_size must be >= 1");
        detail::require(input_size >= 1, "input_size must be >= 1");
        detail::require(leak > 0.0 && leak <= 1.0, "leak must lie in (0, 1]");
        detail::require(density > 0.0 && density <= 1.0, "density must lie in (0, 1]");
        detail::require(spectral_radius >= 0.0, "spectral_radius must be non-negative");
    }
};

struct EsnWeights {
    Eigen::MatrixXd input;      // N_x x N_u
    Eigen::MatrixXd recurrent;  // N_x x N_x
};

inline double spectral_radius(const Eigen::MatrixXd& m)
{
    if (m.size() == 0)
        return 0.0;
    Eigen::EigenSolver<Eigen::MatrixXd> solver(m, false);
    return solver.eigenvalues().cwiseAbs().maxCoeff();
}

/// Sparse uniform [-1, 1] recurrent weights rescaled to the target spectral radius,
/// uniform [-input_scale, input_scale] input weights.
inline EsnWeights make_esn_weights(const EsnConfig& cfg)
{
    cfg.validate();
    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    std::uniform_real_distribution<double> coin(0.0, 1.0);

    EsnWeights w;
    w.recurrent = Eigen::MatrixXd::Zero(cfg.reservoir_size, cfg.reservoir_size);
    for (int i = 0; i < cfg.reservoir_size; ++i)
        for (int j = 0; j < cfg.reservoir_size; ++j)
            if (coin(rng) < cfg.density)
                w.recurrent(i, j) = unit(rng);
    const double rho = spectral_radius(w.recurrent);
    if (cfg.spectral_radius > 0.0) {
        detail::require(rho > 0.0, "random recurrent matrix has zero spectral radius");
        w.recurrent *= cfg.spectral_radius / rho;
    } else {
        w.recurrent.setZero();
    }

    w.input.resize(cfg.reservoir_size, cfg.input_size);
    for (int i = 0; i < cfg.reservoir_size; ++i)
        for (int j = 0; j < cfg.input_size; ++j)
            w.input(i, j) = cfg.input_scale * unit(rng);
    return w;
}

/// Shift register of depth + 1 cells: x_n[i] = u_{n-i}. With identity activation and unit
/// leak the state holds u_n ... u_{n-depth} exactly.
inline EsnWeights delay_line_weights(int depth)
{
    detail::require(depth >= 1, "delay line depth must be >= 1");
    const int cells = depth + 1;
    EsnWeights w;
    w.input = Eigen::MatrixXd::Zero(cells, 1);
    w.input(0, 0) = 1.0;
    w.recurrent = Eigen::MatrixXd::Zero(cells, cells);
    for (int i = 1; i < cells; ++i)
        w.recurrent(i, i - 1) = 1.0;
    return w;
}

/// x_n = (1 - leak) x_{n-1} + leak * f(W_in u_n + W x_{n-1}).
inline Eigen::VectorXd esn_update(const Eigen::VectorXd& x_prev, const Eigen::VectorXd& u,
                                  const EsnWeights& w, double leak,
                                  Activation activation = Activation::tanh)
{
    if (x_prev.size() != w.recurrent.rows() || w.recurrent.rows() != w.recurrent.cols() ||
        u.size() != w.input.cols() || w.input.rows() != w.recurrent.rows())
        throw DomainError("esn_update dimension mismatch");
    Eigen::VectorXd pre = w.input * u + w.recurrent * x_prev;
    if (activation == Activation::tanh)
        pre = pre.array().tanh().matrix();
    return (1.0 - leak) * x_prev + leak * pre;
}

/// Feature matrix with one column per symbol: [1; u_n; x_n].
struct StateMatrix {
    Eigen::MatrixXd X;

    Eigen::Index features() const { return X.rows(); }
    Eigen::Index steps() const { return X.cols(); }
};

inline StateMatrix assemble_states(const Eigen::MatrixXd& inputs, const Eigen::MatrixXd& states)
{
    detail::require(inputs.cols() == states.cols(), "inputs and states differ in length");
    StateMatrix sm;
    sm.X.resize(1 + inputs.rows() + states.rows(), inputs.cols());
    sm.X.row(0).setOnes();
    sm.X.middleRows(1, inputs.rows()) = inputs;
    sm.X.bottomRows(states.rows()) = states;
    return sm;
}

inline Eigen::MatrixXd bits_as_inputs(const std::vector<int>& bits)
{
    Eigen::MatrixXd u(1, static_cast<Eigen::Index>(bits.size()));
    for (std::size_t n = 0; n < bits.size(); ++n)
        u(0, static_cast<Eigen::Index>(n)) = bits[n];
    return u;
}

/// Drives an ESN from x = 0 with the given bit stream and returns the [1; u; x] matrix.
inline StateMatrix run_esn(const EsnWeights& w, const std::vector<int>& bits, double leak,
                           Activation activation)
{
    const Eigen::MatrixXd u = bits_as_inputs(bits);
    Eigen::MatrixXd states(w.recurrent.rows(), u.cols());
    Eigen::VectorXd x = Eigen::VectorXd::Zero(w.recurrent.rows());
    for (Eigen::Index n = 0; n < u.cols(); ++n) {
        x = esn_update(x, u.col(n), w, leak, activation);
        states.col(n) = x;
    }
    return assemble_states(u, states);
}

/// Placement of consecutive symbol slots on a trajectory's time axis.
struct SymbolSlots {
    std::size_t count = 0;
    double slot_tau = 0.0;
    double start_tau = 0.0;
};

/// x_n = scattered pressure at virtual_neurons equally spaced instants inside slot n,
/// starting at the slot's leading edge.
inline StateMatrix harvest_virtual_neurons(const Trajectory& traj, const SymbolSlots& slots,
                                           int virtual_neurons, const std::vector<int>& bits)
{
    detail::require(virtual_neurons >= 1, "virtual_neurons must be >= 1");
    detail::require(slots.count == bits.size(), "one bit per symbol slot is required");
    detail::require_positive(slots.slot_tau, "slot length");
    detail::require(slots.slot_tau / traj.dtau >= virtual_neurons,
                    "trajectory too coarse for the requested virtual neurons");

    // Offsets are rounded once so that every slot is sampled at the same phase.
    std::vector<long long> offset(static_cast<std::size_t>(virtual_neurons));
    for (int v = 0; v < virtual_neurons; ++v)
        offset[static_cast<std::size_t>(v)] =
            std::llround(static_cast<double>(v) / virtual_neurons * slots.slot_tau / traj.dtau);

    Eigen::MatrixXd states(virtual_neurons, static_cast<Eigen::Index>(slots.count));
    for (std::size_t n = 0; n < slots.count; ++n) {
        const auto first = std::llround(
            (slots.start_tau + static_cast<double>(n) * slots.slot_tau - traj.tau_start) / traj.dtau);
        for (int v = 0; v < virtual_neurons; ++v) {
            const auto idx = first + offset[static_cast<std::size_t>(v)];
            if (idx < 0 || static_cast<std::size_t>(idx) >= traj.size())
                throw DomainError("symbol slots extend beyond the trajectory");
            states(v, static_cast<Eigen::Index>(n)) = traj.p_scat[static_cast<std::size_t>(idx)];
        }
    }
    return assemble_states(bits_as_inputs(bits), states);
}

struct ReadoutModel {
    Eigen::MatrixXd weights;  // outputs x features
    double beta = 0.0;
};

/// W_out = Y X^T (X X^T + beta I)^{-1}, solved through the symmetric normal equations.
inline ReadoutModel train_readout(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y, double beta)
{
    detail::require(X.cols() == Y.cols(), "state and target matrices differ in column count");
    detail::require(beta >= 0.0, "beta must be non-negative");
    Eigen::MatrixXd gram = X * X.transpose();
    gram.diagonal().array() += beta;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
    // LDLT::rcond() misses exact zero pivots, so compare the pivots directly.
    const auto pivots = ldlt.vectorD().cwiseAbs();
    const bool singular = pivots.size() > 0 && !(pivots.minCoeff() > 1e-14 * pivots.maxCoeff());
    if (ldlt.info() != Eigen::Success || (beta == 0.0 && singular))
        throw DomainError("normal equations are singular; use beta > 0");
    ReadoutModel model;
    model.beta = beta;
    model.weights = ldlt.solve(X * Y.transpose()).transpose();
    if (!model.weights.allFinite())
        throw DomainError("readout has non-finite weights; use beta > 0");
    return model;
}

inline Eigen::MatrixXd predict(const ReadoutModel& model, const Eigen::MatrixXd& X)
{
    if (model.weights.cols() != X.rows())
        throw DomainError("feature dimension does not match the readout");
    return model.weights * X;
}

/// u_{n-k} xor u_{n-k-1} xor u_{n-k-2}; element j corresponds to n = j + k + 2.
inline std::vector<int> parity_target(const std::vector<int>& bits, int k)
{
    detail::require(k >= 0, "delay must be non-negative");
    const auto need = static_cast<std::size_t>(k) + 3;
    if (bits.size() < need)
        throw DomainError("sequence shorter than delay + 3");
    std::vector<int> out;
    out.reserve(bits.size() - need + 1);
    for (std::size_t n = need - 1; n < bits.size(); ++n) {
        const std::size_t m = n - static_cast<std::size_t>(k);
        out.push_back(bits[m] ^ bits[m - 1] ^ bits[m - 2]);
    }
    return out;
}

/// Squared correlation per delay k = 0..k_max; capacity sums k = 1..k_max.
struct CapacityReport {
    std::vector<double> r2;
    double capacity = 0.0;
};

enum class MemoryTask { short_term, parity };

struct CapacityOptions {
    double beta = 1.0e-8;
    int k_max = 15;
};

namespace detail {

inline double r2_or_zero(const Eigen::RowVectorXd& prediction, const Eigen::RowVectorXd& target)
{
    try {
        return pearson_r2(
            std::span<const double>(prediction.data(), static_cast<std::size_t>(prediction.size())),
            std::span<const double>(target.data(), static_cast<std::size_t>(target.size())));
    } catch (const DomainError&) {
        return 0.0;  // constant prediction or target: no correlation to measure
    }
}

}  // namespace detail

/// Trains on the first half of the symbols, scores on the second half.
inline CapacityReport delay_capacity(const StateMatrix& states, const std::vector<int>& bits,
                                     MemoryTask task, const CapacityOptions& opt)
{
    const auto n = static_cast<Eigen::Index>(bits.size());
    detail::require(states.steps() == n, "state matrix and bit stream differ in length");
    detail::require(opt.k_max >= 1, "k_max must be >= 1");
    const Eigen::Index half = n / 2;
    const Eigen::Index lag = opt.k_max + (task == MemoryTask::parity ? 2 : 0);
    if (half - lag < 2)
        throw DomainError("k_max " + std::to_string(opt.k_max) + " too large for " +
                          std::to_string(n) + " symbols");

    CapacityReport report;
    for (int k = 0; k <= opt.k_max; ++k) {
        const Eigen::Index first = k + (task == MemoryTask::parity ? 2 : 0);
        Eigen::RowVectorXd target(n - first);
        if (task == MemoryTask::short_term) {
            for (Eigen::Index i = first; i < n; ++i)
                target(i - first) = bits[static_cast<std::size_t>(i - k)];
        } else {
            const auto p = parity_target(bits, k);
            for (Eigen::Index i = 0; i < n - first; ++i)
                target(i) = p[static_cast<std::size_t>(i)];
        }
        const Eigen::Index train = half - first;
        const ReadoutModel model =
            train_readout(states.X.middleCols(first, train), target.head(train), opt.beta);
        const Eigen::RowVectorXd predicted = predict(model, states.X.rightCols(n - half));
        const double r2 = detail::r2_or_zero(predicted, target.tail(n - half));
        report.r2.push_back(r2);
        if (k >= 1)
            report.capacity += r2;
    }
    return report;
}

inline CapacityReport stm_capacity(const StateMatrix& states, const std::vector<int>& bits,
                                   const CapacityOptions& opt)
{
    return delay_capacity(states, bits, MemoryTask::short_term, opt);
}

inline CapacityReport pc_capacity(const StateMatrix& states, const std::vector<int>& bits,
                                  const CapacityOptions& opt)
{
    return delay_capacity(states, bits, MemoryTask::parity, opt);
}

/// Reproducible uniform random bits.
inline std::vector<int> random_bits(std::size_t count, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::vector<int> bits(count);
    for (auto& b : bits)
        b = static_cast<int>(rng() >> 63);
    return bits;
}

struct BubbleReservoirOptions {
    int virtual_neurons = 20;
    double slot_relaxation_times = 1.0;  // slot length in units of tau0
    double far_field_distance = 100.0;
    ForcingDerivative derivative = ForcingDerivative::dropped;
    double max_dtau = 0.0;  // 0: solver default
};

/// Encodes the bits as unit pressure pulses, integrates the bubble over the whole stream
/// and samples its scattered pressure into the state matrix.
inline StateMatrix bubble_state_matrix(const std::vector<int>& bits, const DimensionlessSet& g,
                                       const BubbleReservoirOptions& opt)
{
    detail::require(!bits.empty(), "bit stream is empty");
    detail::require_positive(opt.slot_relaxation_times, "slot length");
    const double slot_tau = opt.slot_relaxation_times * relaxation_time(g);
    const double max_dtau = opt.max_dtau > 0.0 ? opt.max_dtau : default_dtau(g);
    const auto steps_per_slot = static_cast<std::size_t>(std::ceil(slot_tau / max_dtau));
    const double dtau = slot_tau / static_cast<double>(steps_per_slot);

    BinarySequence seq{bits, g.to_seconds(slot_tau)};
    PressureSignal forcing = encode_binary(seq, g.to_seconds(dtau));

    SolverOptions so;
    so.dtau = dtau;
    so.tau_end = slot_tau * static_cast<double>(bits.size());
    so.far_field_distance = opt.far_field_distance;
    so.derivative = opt.derivative;
    const Trajectory traj = simulate(BubbleState{}, forcing, g, so);

    return harvest_virtual_neurons(traj, SymbolSlots{bits.size(), slot_tau, 0.0},
                                   opt.virtual_neurons, bits);
}

inline void write_capacity_csv(const CapacityReport& stm, const CapacityReport& pc,
                               const std::string& path)
{
    std::ofstream out(path);
    if (!out)
        throw IoError("cannot write " + path);
    out << "k,r2_stm,r2_pc\n" << std::setprecision(10);
    for (std::size_t k = 0; k < stm.r2.size() && k < pc.r2.size(); ++k)
        out << k << ',' << stm.r2[k] << ',' << pc.r2[k] << '\n';
    out << "# C_STM=" << stm.capacity << " C_PC=" << pc.capacity << '\n';
    if (!out)
        throw IoError("write failed for " + path);
}

}  // namespace bubblesynth

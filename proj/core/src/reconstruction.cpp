#include "mprd/reconstruction.hpp"

#include <unsupported/Eigen/FFT>

#include <cmath>
#include <iostream>
#include <numbers>
#include <stdexcept>

namespace mprd {

namespace {

constexpr double kPi = std::numbers::pi;

}  // namespace

Dictionary::Dictionary(const TimeGrid& grid, double f_max_hz) : grid_(grid), f_max_(f_max_hz) {
    if (f_max_hz < 0.0)
        throw std::invalid_argument("build_dictionary: f_max must be non-negative");
    if (f_max_hz >= grid.nyquist())
        throw std::invalid_argument("build_dictionary: f_max must be below Nyquist");
    const double cycles = f_max_hz / grid.delta_f();
    if (std::abs(cycles - std::round(cycles)) > 1e-6 * std::max(1.0, cycles))
        throw std::invalid_argument("build_dictionary: f_max is not a multiple of 1/duration");
    k_max_ = static_cast<std::size_t>(std::llround(cycles));
}

double Dictionary::frequency_of(std::size_t atom_index) const {
    if (atom_index >= n_atoms())
        throw std::invalid_argument("Dictionary: atom index out of range");
    if (atom_index == 0)
        return 0.0;
    return static_cast<double>((atom_index + 1) / 2) * delta_f();
}

Eigen::VectorXd Dictionary::atom(std::size_t atom_index) const {
    if (atom_index >= n_atoms())
        throw std::invalid_argument("Dictionary: atom index out of range");
    const std::size_t n = grid_.n_samples;
    Eigen::VectorXd column(static_cast<Eigen::Index>(n));

    if (atom_index == 0) {
        column.setOnes();
    } else {
        const std::size_t k = (atom_index + 1) / 2;
        const bool sine = is_sine(atom_index);
        // Per-sample phase 2 pi k i / n evaluated through an integer modulus
        // so large k*i products never lose phase accuracy.
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t cycles_mod = (k * i) % n;
            const double phase = 2.0 * kPi * static_cast<double>(cycles_mod) / static_cast<double>(n);
            column[static_cast<Eigen::Index>(i)] = sine ? std::sin(phase) : std::cos(phase);
        }
    }
    column /= column.norm();
    return column;
}

Dictionary build_dictionary(const TimeGrid& grid, double f_max_hz) {
    return Dictionary(grid, f_max_hz);
}

std::vector<Eigen::MatrixXd> sensing_base_columns(const Dictionary& dictionary,
                                                  const ChipSequence& chips, const FilterSpec& lpf,
                                                  std::span<const DecimationPlan> plans) {
    const TimeGrid& grid = dictionary.grid();
    const Waveform prbs_unit = chips_to_waveform(chips, grid, 1.0);
    const std::size_t n_atoms = dictionary.n_atoms();

    std::vector<Eigen::MatrixXd> bases;
    bases.reserve(plans.size());
    for (const DecimationPlan& plan : plans) {
        const std::size_t m = decimated_length(grid.n_samples, plan);
        if (m == 0)
            throw std::invalid_argument("build_sensing_matrix: plan exceeds the record length");
        bases.emplace_back(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n_atoms));
    }

    Waveform mixed{grid, Eigen::VectorXd(static_cast<Eigen::Index>(grid.n_samples)), ""};
    for (std::size_t j = 0; j < n_atoms; ++j) {
        mixed.samples = prbs_unit.samples.cwiseProduct(dictionary.atom(j));
        const Waveform filtered = lowpass(mixed, lpf);
        for (std::size_t p = 0; p < plans.size(); ++p)
            bases[p].col(static_cast<Eigen::Index>(j)) = decimate(filtered, plans[p]).values;
    }
    return bases;
}

SensingMatrix build_sensing_matrix(const Dictionary& dictionary, const ModulatorParams& modulator,
                                   const PdParams& pd, const ChipSequence& chips,
                                   const FilterSpec& lpf, const DecimationPlan& plan) {
    const DecimationPlan plans[] = {plan};
    std::vector<Eigen::MatrixXd> base = sensing_base_columns(dictionary, chips, lpf, plans);

    SensingMatrix matrix;
    matrix.gain_model = 0.5 * std::sin(modulator.alpha()) * pd.gain;
    matrix.entries = matrix.gain_model * base.front();
    matrix.plan = plan;
    return matrix;
}

SparseSolution omp(const Eigen::MatrixXd& A, const Eigen::VectorXd& y,
                   std::size_t sparsity_budget, double residual_tol) {
    const Eigen::Index m = A.rows();
    const Eigen::Index n = A.cols();
    if (y.size() != m)
        throw std::invalid_argument("omp: measurement length does not match matrix rows");
    if (sparsity_budget > static_cast<std::size_t>(m))
        throw std::invalid_argument("omp: sparsity budget exceeds the measurement count");

    SparseSolution solution;
    const double y_norm = y.norm();
    solution.residual_norms.push_back(y_norm);
    if (y_norm == 0.0)
        return solution;

    Eigen::VectorXd column_norms(n);
    bool warned_zero_column = false;
    for (Eigen::Index j = 0; j < n; ++j) {
        column_norms[j] = A.col(j).norm();
        if (column_norms[j] == 0.0 && !warned_zero_column) {
            std::cerr << "omp: warning: zero column " << j << " skipped during selection\n";
            warned_zero_column = true;
        }
    }

    Eigen::VectorXd residual = y;
    std::vector<char> selected(static_cast<std::size_t>(n), 0);
    Eigen::MatrixXd active(m, static_cast<Eigen::Index>(sparsity_budget));

    while (solution.iterations < sparsity_budget) {
        const Eigen::VectorXd correlation = A.transpose() * residual;

        Eigen::Index best = -1;
        double best_score = 0.0;
        for (Eigen::Index j = 0; j < n; ++j) {
            if (selected[static_cast<std::size_t>(j)] || column_norms[j] == 0.0)
                continue;
            const double score = std::abs(correlation[j]) / column_norms[j];
            if (score > best_score) {  // strict: ties resolve to the lowest index
                best_score = score;
                best = j;
            }
        }
        if (best < 0 || best_score == 0.0)
            break;  // residual is orthogonal to every remaining column

        const Eigen::Index k = static_cast<Eigen::Index>(solution.support.size());
        active.col(k) = A.col(best);
        solution.support.push_back(static_cast<std::size_t>(best));
        selected[static_cast<std::size_t>(best)] = 1;

        const auto active_block = active.leftCols(k + 1);
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(active_block);
        if (qr.rank() < k + 1) {
            // Dependent support: drop the newest atom, keep the previous
            // least-squares fit, and stop.
            solution.support.pop_back();
            break;
        }
        solution.coefficients = qr.solve(y);
        residual = y - active_block * solution.coefficients;
        solution.residual_norms.push_back(residual.norm());
        ++solution.iterations;

        if (residual.norm() <= residual_tol * y_norm)
            break;
    }
    return solution;
}

SparseSolution omp(const SensingMatrix& A, const MeasurementVector& y,
                   std::size_t sparsity_budget, double residual_tol) {
    return omp(A.entries, y.values, sparsity_budget, residual_tol);
}

Waveform reconstruct_signal(const SparseSolution& solution, const Dictionary& dictionary,
                            double gain_model) {
    if (!(gain_model != 0.0))
        throw std::invalid_argument("reconstruct_signal: gain_model must be nonzero");

    Waveform x{dictionary.grid(),
               Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dictionary.grid().n_samples)),
               "radians"};
    for (std::size_t i = 0; i < solution.support.size(); ++i)
        x.samples += solution.coefficients[static_cast<Eigen::Index>(i)] *
                     dictionary.atom(solution.support[i]);
    x.samples /= gain_model;
    return x;
}

double reconstruction_error(const Waveform& x_rec, const Waveform& x_true) {
    if (!(x_rec.grid == x_true.grid))
        throw std::invalid_argument("reconstruction_error: waveforms must share one grid");
    const double reference = x_true.samples.squaredNorm();
    if (reference == 0.0)
        throw std::invalid_argument("reconstruction_error: reference signal has zero norm");
    return (x_rec.samples - x_true.samples).squaredNorm() / reference;
}

std::vector<double> dictionary_spectrum(const Waveform& waveform, const Dictionary& dictionary) {
    if (!(waveform.grid == dictionary.grid()))
        throw std::invalid_argument("dictionary_spectrum: waveform grid does not match dictionary");

    // Projections onto the orthonormal cosine/sine atoms are scaled DFT bins:
    // <cos_k, w> = Re X_k / ||cos_k||, <sin_k, w> = -Im X_k / ||sin_k||, with
    // ||.|| = sqrt(n/2) for k >= 1 and sqrt(n) for the DC atom. One transform
    // replaces 2N full-length dot products.
    Eigen::FFT<double> fft;
    Eigen::VectorXcd spectrum;
    fft.fwd(spectrum, waveform.samples);

    const double n = static_cast<double>(waveform.grid.n_samples);
    std::vector<double> magnitudes(dictionary.n_frequencies());
    magnitudes[0] = std::abs(spectrum[0].real()) / std::sqrt(n);
    for (std::size_t k = 1; k <= dictionary.k_max(); ++k)
        magnitudes[k] = std::abs(spectrum[static_cast<Eigen::Index>(k)]) / std::sqrt(0.5 * n);
    return magnitudes;
}

}  // namespace mprd

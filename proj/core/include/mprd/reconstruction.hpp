#pragma once

#include "mprd/digitizer.hpp"
#include "mprd/photonic_frontend.hpp"
#include "mprd/waveforms.hpp"

#include <span>
#include <vector>

namespace mprd {

/// Fourier orthogonal basis on the record: atom 0 is the constant DC atom,
/// atoms 2k-1 and 2k are the cosine and sine at frequency k * delta_f with
/// delta_f = 1/duration, k = 1..k_max. Atoms are unit-norm and mutually
/// orthogonal over the record. Columns are materialized on demand; a full
/// default dictionary (20,000 x 1001) is never stored.
class Dictionary {
  public:
    Dictionary(const TimeGrid& grid, double f_max_hz);

    const TimeGrid& grid() const { return grid_; }
    double f_max() const { return f_max_; }
    double delta_f() const { return grid_.delta_f(); }
    std::size_t k_max() const { return k_max_; }
    std::size_t n_atoms() const { return 1 + 2 * k_max_; }
    std::size_t n_frequencies() const { return k_max_ + 1; }

    /// Frequency of atom j in Hz (0 for the DC atom).
    double frequency_of(std::size_t atom_index) const;
    bool is_sine(std::size_t atom_index) const { return atom_index != 0 && atom_index % 2 == 0; }

    /// Unit-norm column j, deterministic for a given (grid, j).
    Eigen::VectorXd atom(std::size_t atom_index) const;

  private:
    TimeGrid grid_;
    double f_max_ = 0.0;
    std::size_t k_max_ = 0;
};

Dictionary build_dictionary(const TimeGrid& grid, double f_max_hz);

/// M x N random-demodulator measurement operator. Column j is constructed as
///   gain_model * decimate(lowpass(ideal_prbs .* atom_j))
/// with the IDEAL +/-1 NRZ chips: the receiver knows the nominal code and
/// v_code but never sees the bandlimiting distortion. gain_model is the
/// mixed-term coefficient (1/2) sin(pi v_code / v_pi) times the PD gain.
struct SensingMatrix {
    Eigen::MatrixXd entries;
    double gain_model = 1.0;
    DecimationPlan plan;
};

SensingMatrix build_sensing_matrix(const Dictionary& dictionary, const ModulatorParams& modulator,
                                   const PdParams& pd, const ChipSequence& chips,
                                   const FilterSpec& lpf, const DecimationPlan& plan);

/// Unit-gain base columns decimate(lowpass(ideal_prbs .* atom_j)) for several
/// plans in one pass over the dictionary. build_sensing_matrix is the
/// single-plan case; sweeps use this directly to share the per-atom filtering.
std::vector<Eigen::MatrixXd> sensing_base_columns(const Dictionary& dictionary,
                                                  const ChipSequence& chips, const FilterSpec& lpf,
                                                  std::span<const DecimationPlan> plans);

struct SparseSolution {
    std::vector<std::size_t> support;  // distinct atom indices, selection order
    Eigen::VectorXd coefficients;      // aligned with support
    std::vector<double> residual_norms;  // ||y||, then after each iteration
    std::size_t iterations = 0;
};

/// Orthogonal matching pursuit. Each iteration selects the column with the
/// largest |correlation| / column-norm against the residual (ties break to
/// the lowest index), solves least squares on the active support via a
/// rank-revealing QR, and updates the residual. Stops at the sparsity budget
/// or when the residual norm falls to residual_tol * ||y||. A dependent
/// support column drops the newest atom and terminates.
SparseSolution omp(const Eigen::MatrixXd& A, const Eigen::VectorXd& y,
                   std::size_t sparsity_budget, double residual_tol);
SparseSolution omp(const SensingMatrix& A, const MeasurementVector& y,
                   std::size_t sparsity_budget, double residual_tol);

/// Full-rate reconstruction x' = (1/gain_model) * sum coefficients * atoms.
Waveform reconstruct_signal(const SparseSolution& solution, const Dictionary& dictionary,
                            double gain_model);

/// ||x_rec - x_true||_2^2 / ||x_true||_2^2 on a shared grid.
double reconstruction_error(const Waveform& x_rec, const Waveform& x_true);

/// Per-frequency magnitudes of a waveform projected onto the dictionary:
/// entry k combines the cosine and sine coefficients at k * delta_f.
std::vector<double> dictionary_spectrum(const Waveform& waveform, const Dictionary& dictionary);

struct ReconstructionResult {
    Waveform x_rec;
    double error = 0.0;
    SparseSolution solution;
};

}  // namespace mprd

#ifndef GSC_SPECTRAL_HPP
#define GSC_SPECTRAL_HPP

#include <string>
#include <vector>

#include "gsc/quadrature.hpp"

namespace gsc {

enum class ModelKind { DirichletHeat, NeumannHeat, VariableCoefficient, RadialBall3d, Custom };
enum class MuKind { XSquared, X };  // multiplier of the control operator B

std::string to_string(ModelKind k);
ModelKind model_kind_from_string(const std::string& s);

/// Modal coefficients of a state in the (orthonormal) eigenbasis; the
/// Euclidean norm of the vector is the L2 norm of the truncated state.
using ModalVector = std::vector<double>;

/// Finite spectral representation of an operator pair (A, B): eigenvalues of
/// A, the coupling matrix <B phi_j, phi_k>, and the declared gap/dispersion
/// constants the synthesis loop relies on.
struct SpectralModel {
    ModelKind kind = ModelKind::Custom;
    int n_modes = 0;
    std::vector<double> eigenvalues;  // ascending, eigenvalues[0] >= 0
    std::vector<double> coupling;     // row-major n_modes x n_modes
    double gap_alpha = 0.0;
    double dispersion_q = 0.0;
    double dispersion_b = 0.0;
    std::string label;

    double coupling_at(int j, int k) const {  // 1-indexed
        return coupling[static_cast<size_t>(j - 1) * n_modes + (k - 1)];
    }
    std::vector<double> ground_coupling() const;  // <B phi_1, phi_k>, k = 1..N
    double coupling_spectral_norm() const;
};

struct HypothesisReport {
    double declared_alpha = 0, declared_q = 0, declared_b = 0;
    double min_gap = 0;          // min_k sqrt(lam_{k+1}) - sqrt(lam_k)
    double min_dispersion = 0;   // min_{k>=2} lam_k^q |coupling(1,k)|
    double coupling_11 = 0;
    double max_asymmetry = 0;
    bool eigenvalues_ascending = false;
    bool gap_ok = false;
    bool dispersion_ok = false;
    bool coupling_nonzero_ok = false;
    bool all_ok() const {
        return eigenvalues_ascending && gap_ok && dispersion_ok && coupling_nonzero_ok;
    }
};

/// Builds one of the built-in operator pairs at truncation level n_modes.
/// Couplings are computed by adaptive Gauss-Legendre quadrature against the
/// analytic eigenfunctions. Throws QuadratureFailure or HypothesisViolation.
SpectralModel build_model(ModelKind kind, int n_modes, const QuadratureConfig& qcfg = {});
SpectralModel build_model(ModelKind kind, int n_modes, const QuadratureConfig& qcfg, MuKind mu);

/// Report-only check of the gap and dispersion hypotheses.
HypothesisReport verify_spectral_hypotheses(const SpectralModel& model);

/// Throws HypothesisViolation naming the first violated invariant.
void validate_model(const SpectralModel& model);

/// Reads a model from a JSON document (eigenvalues, coupling, alpha, q, b,
/// label). Throws ParseError or HypothesisViolation.
SpectralModel load_custom_spectral(const std::string& path);
SpectralModel parse_custom_spectral(const std::string& json_text);

MuKind default_mu(ModelKind kind);

/// Analytic eigenfunction of a built-in kind on (0,1) (radial kinds are
/// reduced to their 1D integrand form, so plain-weight quadrature of
/// phi_j phi_k reproduces the model's inner product).
std::function<double(double)> analytic_eigenfunction(ModelKind kind, int k);

}  // namespace gsc

#endif

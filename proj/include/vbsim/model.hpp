#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace vbsim {

/// Vector dispersal operator.
///   kNonFickian: d_t u = Laplacian(D u), no-flux on D u.
///   kFickian:    d_t u = div(D grad u),  no-flux on u.
enum class Formulation { kNonFickian, kFickian };

enum class SplittingScheme { kLie, kStrang };

/// Time integrator used inside each splitting stage.
///   kImplicitEuler: first order, keeps the discrete maximum principle.
///   kTrapezoidal:   second order (Crank-Nicolson); nonnegativity is then
///                   only restored by clamping.
enum class StageIntegrator { kImplicitEuler, kTrapezoidal };

/// Implicitness weight of the theta-method realizing `s`.
inline double implicit_weight(StageIntegrator s) { return s == StageIntegrator::kTrapezoidal ? 0.5 : 1.0; }

/// Rate or coefficient that is either uniform over the domain or given per cell.
class CellCoefficient {
public:
    CellCoefficient(double value = 0.0) : uniform_(value) {}  // NOLINT(google-explicit-constructor)
    explicit CellCoefficient(std::vector<double> values) : values_(std::move(values)) {}

    double operator[](std::size_t cell) const { return values_.empty() ? uniform_ : values_[cell]; }

    bool is_uniform() const { return values_.empty(); }
    /// Per-cell values; empty when uniform.
    const std::vector<double>& values() const { return values_; }
    std::vector<double> expand(std::size_t cells) const;

    double min(std::size_t cells) const;
    double max(std::size_t cells) const;
    CellCoefficient scaled(double factor) const;

private:
    double uniform_ = 0.0;
    std::vector<double> values_;
};

struct ModelParams {
    CellCoefficient beta_v = 0.0;    // contact rate of a vector with hosts
    CellCoefficient beta_h = 0.0;    // contact rate of a host with vectors
    CellCoefficient diffusion = 1.0; // vector diffusion coefficient D
    double epsilon = 1.0;            // exit rate from the latent (exposed) stage
    Formulation formulation = Formulation::kNonFickian;

    /// Throws SolverError when a field has the wrong size or a value is out of range.
    void validate(std::size_t cells) const;
};

/// The five compartment densities over the active cells of a domain.
struct StateFields {
    std::vector<double> sh;  // susceptible hosts
    std::vector<double> eh;  // exposed hosts
    std::vector<double> ih;  // infected hosts
    std::vector<double> sv;  // susceptible vectors
    std::vector<double> iv;  // infected vectors

    static StateFields zeros(std::size_t cells);
    std::size_t size() const { return sh.size(); }
    void validate(std::size_t cells) const;

    /// S_h + E_h + I_h per cell.
    std::vector<double> host_totals() const;
    /// Sum over cells of (S_v + I_v) * cell_area.
    double vector_integral(double cell_area) const;

    bool operator==(const StateFields&) const = default;
};

enum class Compartment { kSh, kEh, kIh, kSv, kIv };

const std::vector<double>& field(const StateFields& s, Compartment c);
std::vector<double>& field(StateFields& s, Compartment c);
std::string compartment_name(Compartment c);
Compartment parse_compartment(const std::string& name);

} // namespace vbsim

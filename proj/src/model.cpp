#include "vbsim/model.hpp"

#include "vbsim/error.hpp"

#include <algorithm>
#include <cmath>

namespace vbsim {

std::vector<double> CellCoefficient::expand(std::size_t cells) const {
    if (!values_.empty()) {
        return values_;
    }
    return std::vector<double>(cells, uniform_);
}

double CellCoefficient::min(std::size_t cells) const {
    if (values_.empty()) {
        return uniform_;
    }
    return *std::min_element(values_.begin(), values_.begin() + std::min(cells, values_.size()));
}

double CellCoefficient::max(std::size_t cells) const {
    if (values_.empty()) {
        return uniform_;
    }
    return *std::max_element(values_.begin(), values_.begin() + std::min(cells, values_.size()));
}

CellCoefficient CellCoefficient::scaled(double factor) const {
    if (values_.empty()) {
        return CellCoefficient(uniform_ * factor);
    }
    std::vector<double> v = values_;
    for (double& x : v) x *= factor;
    return CellCoefficient(std::move(v));
}

namespace {

void check_coefficient(const CellCoefficient& c, std::size_t cells, const char* name) {
    if (!c.is_uniform() && c.values().size() != cells) {
        throw SolverError(std::string(name) + " field size does not match domain");
    }
}

} // namespace

void ModelParams::validate(std::size_t cells) const {
    check_coefficient(beta_v, cells, "beta_v");
    check_coefficient(beta_h, cells, "beta_h");
    check_coefficient(diffusion, cells, "diffusion");
    for (std::size_t i = 0; i < cells; ++i) {
        if (!(diffusion[i] > 0.0) || !std::isfinite(diffusion[i])) {
            throw SolverError("nonpositive diffusion");
        }
        if (!(beta_v[i] >= 0.0) || !(beta_h[i] >= 0.0)) {
            throw SolverError("negative contact rate");
        }
    }
    if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
        throw SolverError("nonpositive epsilon");
    }
}

StateFields StateFields::zeros(std::size_t cells) {
    StateFields s;
    s.sh.assign(cells, 0.0);
    s.eh.assign(cells, 0.0);
    s.ih.assign(cells, 0.0);
    s.sv.assign(cells, 0.0);
    s.iv.assign(cells, 0.0);
    return s;
}

void StateFields::validate(std::size_t cells) const {
    for (const auto* f : {&sh, &eh, &ih, &sv, &iv}) {
        if (f->size() != cells) {
            throw SolverError("state field size does not match domain");
        }
        for (double v : *f) {
            if (!(v >= 0.0) || !std::isfinite(v)) {
                throw SolverError("state field must be finite and nonnegative");
            }
        }
    }
}

std::vector<double> StateFields::host_totals() const {
    std::vector<double> n(sh.size());
    for (std::size_t i = 0; i < n.size(); ++i) {
        n[i] = sh[i] + eh[i] + ih[i];
    }
    return n;
}

double StateFields::vector_integral(double cell_area) const {
    double total = 0.0;
    for (std::size_t i = 0; i < sv.size(); ++i) {
        total += sv[i] + iv[i];
    }
    return total * cell_area;
}

const std::vector<double>& field(const StateFields& s, Compartment c) {
    switch (c) {
    case Compartment::kSh: return s.sh;
    case Compartment::kEh: return s.eh;
    case Compartment::kIh: return s.ih;
    case Compartment::kSv: return s.sv;
    case Compartment::kIv: return s.iv;
    }
    return s.sh;
}

std::vector<double>& field(StateFields& s, Compartment c) {
    return const_cast<std::vector<double>&>(field(static_cast<const StateFields&>(s), c));
}

std::string compartment_name(Compartment c) {
    switch (c) {
    case Compartment::kSh: return "S_h";
    case Compartment::kEh: return "E_h";
    case Compartment::kIh: return "I_h";
    case Compartment::kSv: return "S_v";
    case Compartment::kIv: return "I_v";
    }
    return "?";
}

Compartment parse_compartment(const std::string& name) {
    for (Compartment c : {Compartment::kSh, Compartment::kEh, Compartment::kIh, Compartment::kSv, Compartment::kIv}) {
        if (compartment_name(c) == name) {
            return c;
        }
    }
    throw ConfigError("unknown compartment '" + name + "'");
}

} // namespace vbsim

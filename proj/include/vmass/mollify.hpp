#pragma once

//
// Support-preserving mollification of measures on a C^2 model domain (the
// unit disk). The expansion map x -> x + 3 delta grad k(x) pushes the
// boundary outward before convolving with a standard bump at scale delta,
// so the regularized field stays compactly supported inside the domain,
// keeps its total mass, and keeps a vanishing divergence.
//

#include <array>
#include <functional>
#include <vector>

#include "vmass/tensor.hpp"

namespace vmass {

struct Vec2 {
    double x = 0.0, y = 0.0;
};

struct DomainDescriptor {
    std::function<double(Vec2)> k;
    std::function<Vec2(Vec2)> grad_k;
    std::function<SymMat(Vec2)> hess_k;
    std::function<bool(Vec2)> inside;                  // open domain
    std::function<double(Vec2)> dist_to_closure;       // 0 on the closure
    std::function<Vec2(double)> boundary_point;        // t in [0,1)
    double delta0 = 0.0;    // admissible mollification range
    double sup_hess = 0.0;  // sampled sup |D^2 k| (operator norm)
    double sup_grad = 0.0;  // sampled sup |grad k|

    double lip_grad() const { return sup_hess; }  // c_k

    // epsilon_delta = delta / (1 + 3 delta c_k): the field vanishes within
    // this distance of the boundary
    double collar_width(double delta) const { return delta / (1.0 + 3.0 * delta * lip_grad()); }

    // unit disk with k = cutoff(|x|) (|x|-1); the cutoff is the quintic
    // smoothstep ramp, identically 1 on [0.75, 1.25] and 0 outside
    // [0.5, 1.5], so grad k equals the outward normal on the circle
    static DomainDescriptor unit_disk();
};

struct ThetaResult {
    Vec2 point;
    SymMat jacobian;  // Id + 3 delta D^2 k, symmetric
};

// Throws when delta is outside (0, delta0).
ThetaResult theta(Vec2 x, double delta, const DomainDescriptor& dom);

struct ExpansionReport {
    double min_distance = 0.0;  // min over samples of dist(theta(z), closure)
    double required = 0.0;      // 2 delta
    int samples = 0;
    bool pass = false;
};

ExpansionReport check_expansion(const DomainDescriptor& dom, double delta,
                                int boundary_samples);

// measures: matrix-weighted atoms plus constant-density boxes and segments
struct MatrixAtom {
    Vec2 pos;
    SymMat weight{2};
};
struct MatrixBox {
    Vec2 lo, hi;
    SymMat density{2};
};
struct MatrixSegment {
    Vec2 p0, p1;
    SymMat density{2};  // per unit length
};

struct DiscreteMeasure {
    std::vector<MatrixAtom> atoms;
    std::vector<MatrixBox> boxes;
    std::vector<MatrixSegment> segments;

    double total_variation() const;
    SymMat total() const;  // integral of the measure
};

struct ScalarAtom {
    Vec2 pos;
    double w = 0.0;
};
struct ScalarBox {
    Vec2 lo, hi;
    double density = 0.0;
};

struct ScalarMeasure {
    std::vector<ScalarAtom> atoms;
    std::vector<ScalarBox> boxes;

    double total_mass() const;
};

// the standard bump scaled to integrate to one over the unit disk
double standard_bump(double r2);

class MollifiedField {
public:
    MollifiedField(DiscreteMeasure source, double delta, const DomainDescriptor* dom);

    SymMat evaluate(Vec2 x) const;
    double delta() const { return delta_; }
    const DiscreteMeasure& source() const { return source_; }

    // int phi : lambda^delta dx by per-piece panel quadrature over the
    // inflated supports
    double pair(const std::function<SymMat(Vec2)>& phi, double tol = 1e-9) const;
    // int |lambda^delta| dx (Frobenius); pieces must not overlap after
    // inflation, which the callers arrange
    double total_variation(double tol = 1e-9) const;

    double support_inflation() const;  // delta (1 + 3 sup|grad k|) plus margin

private:
    DiscreteMeasure source_;
    double delta_;
    const DomainDescriptor* dom_;
};

MollifiedField mollify(const DiscreteMeasure& lambda, double delta,
                       const DomainDescriptor& dom);

// scalar regularization (no jacobian sandwich); integrates to the total
// mass of the source
double mollified_mass(const ScalarMeasure& mu, double delta,
                      const DomainDescriptor& dom, double tol = 1e-9);
double mollified_scalar_at(const ScalarMeasure& mu, double delta,
                           const DomainDescriptor& dom, Vec2 x);

// |mu^delta(Omega) - 1| for a probability measure
double mass_check(const ScalarMeasure& mu, double delta, const DomainDescriptor& dom);

struct DivergenceReport {
    double input_residual = 0.0;      // worst | <lambda, grad v> | over the basis
    double mollified_residual = 0.0;  // worst | int lambda^delta : grad v |
    bool pass = false;                // mollified residual within quadrature tolerance
};

// Test fields are the monomial vector fields of component degree <=
// test_degree. The input measure is checked first; a measure that fails
// against the polynomial class reports its own residual.
DivergenceReport divergence_preservation_check(const DiscreteMeasure& lambda,
                                               double delta,
                                               const DomainDescriptor& dom,
                                               int test_degree);

}  // namespace vmass

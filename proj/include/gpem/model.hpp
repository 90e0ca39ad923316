// Gauss–Penner field on the half-line: phi(x) = x^2/2 + beta*x + gamma*log(x+v).
#pragma once

#include <complex>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace gpem {

class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct FieldParams {
    double beta = 0.0;
    double gamma = 1.0;
    double t = 1.0;
    double v = 1.0;  // pole of the log term sits at -v; v = 1 is the normalized field
};

void validate(const FieldParams& p);
FieldParams make_params(double beta, double gamma, double t, double v = 1.0);

double phi(const FieldParams& p, double x);
double dphi(const FieldParams& p, double x);
double d2phi(const FieldParams& p, double x);

// b-roots of the hard-edge scenario: either real (b1 nearer the support) or a
// conjugate pair re ± i·im with im > 0.
struct RealPair {
    double b1;
    double b2;
};
struct ConjPair {
    double re;
    double im;
};
using BPair = std::variant<RealPair, ConjPair>;

struct OneCutHard {
    double a1;
    BPair b;
};
struct OneCutSoft {
    double b1, a2, a3;
};
struct TwoCut {
    double a1, b1, a2, a3;
};
using SupportConfig = std::variant<OneCutHard, OneCutSoft, TwoCut>;

enum class Scenario { OneCutHard, OneCutSoft, TwoCut };

Scenario scenario_of(const SupportConfig& cfg);
std::string_view scenario_name(Scenario s);

// Build the b-pair of a hard-edge config from b1+b2 = s and b1*b2 = q.
BPair bpair_from_sum_product(double s, double q, double a1);
std::pair<double, double> sum_product(const BPair& b);

struct Interval {
    double lo;
    double hi;
};
std::vector<Interval> support(const SupportConfig& cfg);
double support_left(const SupportConfig& cfg);
double support_right(const SupportConfig& cfg);

// Multiply every root (and so the support) by k; maps a solution for the
// normalized field to one for pole position v = k.
SupportConfig scale_config(const SupportConfig& cfg, double k);

std::string describe(const SupportConfig& cfg);

// Density of a config written as Im sqrt(R(x+i0)) / pi, where
// sqrt(R) = B(z)/(z+v) * sqrt(A(z)/q(z)).
struct DensityForm {
    std::vector<double> a;     // zeros of A, ascending
    bool hard_origin = false;  // q(z) = z
    std::vector<double> bc;    // monic B: z^m + bc[m-1] z^{m-1} + ... + bc[0]
    double v = 1.0;

    double B(double x) const;
    std::complex<double> B(std::complex<double> z) const;
    std::complex<double> sqrt_r_upper(double x) const;
    double density(double x) const;
    // Number of factors sqrt(x - a_i) that pick up i on the upper bank at x.
    int sign_on(double x) const;
};

DensityForm density_form(const SupportConfig& cfg, double v);

enum class PhaseRegion {
    A,
    B,
    Cplus,
    Cminus,
    BoundaryBisector,
    BoundaryTripleRootCurve,
    BoundaryTypeIIICurve,
    BoundaryPhiZeroCurve
};

std::string_view region_name(PhaseRegion r);

std::pair<std::complex<double>, std::complex<double>> critical_points(const FieldParams& p);
std::pair<std::complex<double>, std::complex<double>> critical_points(double beta, double gamma);

// 2*phi(y+) for the normalized field, in the closed form used for the C+/C- split.
double twice_phi_at_yplus(double beta, double gamma);
PhaseRegion classify_region(double beta, double gamma);

// Real-line field x^4/4 + b x^2 + c log(x^2 + v) with mass t_real.
struct RealLineField {
    double b, c, v, t_real;
};
FieldParams rescale(double b, double c, double v, double t_real);
RealLineField unrescale(const FieldParams& p, double v);

// Symmetric real-line measure with lambda'(y) = |y| nu'(y^2).
struct RealLineMeasure {
    std::vector<Interval> intervals;
    DensityForm half;
    double density(double y) const;
};
RealLineMeasure halfline_to_realline(const SupportConfig& cfg, double v = 1.0);
int realline_cut_count(Scenario s);

struct QuarticLimit {
    double b1, a2, a3;
};
double quartic_poly(const FieldParams& p, double y);
QuarticLimit quartic_b1_recipe(const FieldParams& p);

// Absolutely continuous part of the v -> 0 limit for gamma > 0.
struct LimitDensity {
    enum class Form { HardEdge, SoftEdge } form;
    double lo, hi;
    double root;  // zero of the hard-edge density (b2 in the limit); unused for SoftEdge
    double density(double x) const;
    double mass() const;
};
struct MeasureLimit {
    double atom_mass = 0.0;
    std::optional<LimitDensity> ac_part;
};
MeasureLimit limit_measure_v0(const FieldParams& p);

struct TransitionLoci {
    double gamma_triple_root;
    double gamma_type_iii;
    double t_triple_root;
    double a1_type_iii;  // collision point on the type-III curve
    double t_type_iii;
};
TransitionLoci transition_loci(double beta);

}  // namespace gpem

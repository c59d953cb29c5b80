// Copyright 2026 The kacsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

#include "kac/gaussian_states.hpp"
#include "kac/quadrature.hpp"

namespace kac {

//! Test function h on R^n with optional analytic derivatives.
struct ScalarField
{
    using Eval = std::function<double(std::span<double const>)>;
    using Grad = std::function<void(std::span<double const>, std::span<double>)>;

    std::size_t dim = 0;
    Eval value;
    Grad gradient;   //!< empty when only values are known
    Eval laplacian;  //!< empty when only values are known

    double operator()(std::span<double const> v) const { return value(v); }
    bool has_gradient() const { return static_cast<bool>(gradient); }
};

ScalarField constant_field(std::size_t n, double c);
//! h(v) = f(v) / gamma_beta(v) with analytic gradient and Laplacian.
ScalarField gaussian_ratio_field(GaussianComponent const& f, double beta);
//! Density law of exp(-s) V + sqrt(1 - exp(-2s)) X, V ~ f, X ~ gamma_beta.
GaussianComponent ou_evolve_gaussian(GaussianComponent const& f, double s, double beta);

//! Central differences, step 1e-5 relative to max(1, |v_k|).
void finite_difference_gradient(ScalarField const& h, std::span<double const> v, std::span<double> out);
double finite_difference_laplacian(ScalarField const& h, std::span<double const> v);

enum class QuadratureScheme
{
    gauss_hermite,  //!< tensor product of the Gauss-Hermite rule
    monte_carlo,    //!< fixed seeded sample set, reused for every v
};

struct QuadratureSpec
{
    QuadratureScheme scheme = QuadratureScheme::gauss_hermite;
    std::size_t order = 40;            //!< nodes per dimension
    std::size_t samples = 1'000'000;   //!< Monte Carlo sample count
    std::uint64_t seed = 0;
    double beta = 1.0;
    double tolerance = 1e-8;           //!< order-doubling disagreement allowed
    bool verify_resolution = false;
    std::size_t eval_order = 8;        //!< evaluation grid nodes per dimension
    std::size_t workers = 1;

    void validate() const;
    //! Gauss-Hermite up to n = 2, Monte Carlo beyond.
    static QuadratureSpec defaults_for(std::size_t n, double beta);
};

class UnderResolvedError : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

/*!
 * P_s h(v) = int h(exp(-s) v + sqrt(1 - exp(-2s)) x) dgamma_beta(x).
 *
 * s = 0 returns h itself. With q.verify_resolution each evaluation is
 * repeated at twice the order (or sample count) and UnderResolvedError is
 * thrown when the two differ by more than q.tolerance * max(1, |value|).
 * The gradient of the result is exp(-s) P_s grad h when h carries one.
 */
ScalarField ou_apply(ScalarField const& h, double s, QuadratureSpec const& q);

//! L h = (1/beta) Laplacian h - v . grad h.
ScalarField ou_generator_apply(ScalarField const& h, double beta);

//! Weighted L2 distance of two fields on the Gauss-Hermite evaluation grid.
double grid_residual(ScalarField const& a, ScalarField const& b, QuadratureSpec const& q);
//! int h dgamma_beta on the evaluation grid at q.order.
double gamma_mean(ScalarField const& h, QuadratureSpec const& q);

//! || P_s P_t h - P_{s+t} h || on the evaluation grid.
double check_semigroup(ScalarField const& h, double s, double t, QuadratureSpec const& q);
//! | <P_s F, G>_gamma - <F, P_s G>_gamma |.
double check_self_adjoint(ScalarField const& F, ScalarField const& G, double s, QuadratureSpec const& q);
//! | int P_s h dgamma - int h dgamma |.
double check_gamma_invariance(ScalarField const& h, double s, QuadratureSpec const& q);

enum class CollisionOpKind
{
    q_average,       //!< average over all pairs of the n_particles and sigma
    thermostat,      //!< particle j against a Maxwellian(beta) partner
    reservoir_pair,  //!< fixed pair (i, j), sigma-averaged
    marginal,        //!< integrate out particles [n_system, n_particles) against gamma_beta
};

struct CollisionOp
{
    CollisionOpKind kind = CollisionOpKind::q_average;
    std::size_t d = 1;
    std::size_t n_particles = 2;
    std::size_t n_system = 1;       //!< marginal only
    std::size_t i = 0;
    std::size_t j = 1;
    std::size_t sigma_order = 8;    //!< sigma-rule resolution for d >= 2
    std::size_t partner_order = 40; //!< Gauss-Hermite order for partner integrals

    void validate() const;
    std::size_t input_dim() const { return d * n_particles; }
    std::size_t output_dim() const;
};

struct SigmaNode
{
    std::vector<double> sigma;
    double weight;
};

//! Quadrature for the uniform measure on S^{d-1}, d in {1, 2, 3}.
std::vector<SigmaNode> sigma_rule(std::size_t d, std::size_t order);

//! The operator realized by sigma- and partner-quadrature, in the
//! ground-state picture (acting on h = f / gamma).
ScalarField apply_collision_op(ScalarField const& h, CollisionOp const& op, double beta);

//! || P_s (op h) - op (P_s h) || on the evaluation grid of op's output.
double check_commutation(ScalarField const& h, double s, CollisionOp const& op, QuadratureSpec const& q);

//! check_commutation at each order in `orders` (all other settings from q).
std::vector<double> commutation_refinement(ScalarField const& h, double s, CollisionOp const& op,
                                           QuadratureSpec q, std::vector<std::size_t> const& orders);

//! True if each entry is <= its predecessor or both sit below `floor`.
bool nonincreasing_with_floor(std::vector<double> const& residuals, double floor = 1e-12);

//! int |grad h|^2 / h dgamma_beta on the evaluation grid.
double fisher_info_quadrature(ScalarField const& h, QuadratureSpec const& q);

//! s -> I(P_s h); inner P_s at q.order, outer integral at q.eval_order.
std::function<double(double)> information_curve(ScalarField const& h, QuadratureSpec const& q);

struct SIntegration
{
    double s_max = 12.0;
    std::size_t panels = 48;
    std::size_t order = 8;  //!< Gauss-Legendre nodes per panel
};

struct EntropyFromInformation
{
    double entropy = 0.0;   //!< (integral + tail) / beta
    double integral = 0.0;  //!< int_0^{s_max} I(P_s h) ds
    double tail = 0.0;      //!< fitted c exp(-2s) beyond s_max, integrated
};

class NonDecayingCurveError : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

/*!
 * (1/beta) int_0^inf I(P_s h) ds by composite Gauss-Legendre on [0, s_max]
 * plus a c exp(-2s) tail matched at s_max. Throws NonDecayingCurveError if
 * the curve is negative, non-finite, or increasing at the end of the range.
 */
EntropyFromInformation entropy_from_information(std::function<double(double)> const& curve, double beta,
                                                SIntegration const& spec = {});

} // namespace kac

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

#include "kac/ou_semigroup.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>
#include <string>

#include "kac/kinematics.hpp"
#include "kac/parallel.hpp"
#include "kac/random.hpp"

namespace kac {
namespace {

constexpr std::uint64_t kOuSampleTag = 0x6f7573616d70ull;
constexpr std::size_t kMaxTensorNodes = std::size_t{1} << 24;
constexpr std::size_t kGridBlock = 16;

// Nodes of gamma_beta on R^n, flattened point-major.
struct NodeSet
{
    std::size_t dim = 0;
    std::vector<double> points;
    std::vector<double> weights;

    std::size_t size() const { return weights.size(); }
    std::span<double const> point(std::size_t k) const { return {points.data() + k * dim, dim}; }
};

std::shared_ptr<NodeSet const> tensor_nodes(std::size_t n, std::size_t order, double beta)
{
    double count = std::pow(static_cast<double>(order), static_cast<double>(n));
    if (count > static_cast<double>(kMaxTensorNodes))
        throw std::length_error("tensor quadrature too large; use the Monte Carlo scheme");
    auto out = std::make_shared<NodeSet>();
    out->dim = n;
    GaussRule const rule = gauss_hermite(order);
    double const scale = 1.0 / std::sqrt(beta);
    for_each_tensor_node(rule, n, [&](std::span<double const> x, double w) {
        for (double xi : x)
            out->points.push_back(scale * xi);
        out->weights.push_back(w);
    });
    return out;
}

std::shared_ptr<NodeSet const> sample_nodes(std::size_t n, std::size_t samples, double beta, std::uint64_t seed)
{
    auto out = std::make_shared<NodeSet>();
    out->dim = n;
    out->points.resize(n * samples);
    out->weights.assign(samples, 1.0 / static_cast<double>(samples));
    Rng rng(seed, substream(kOuSampleTag, n));
    double const scale = 1.0 / std::sqrt(beta);
    for (double& x : out->points)
        x = scale * rng.normal();
    return out;
}

std::shared_ptr<NodeSet const> nodes_for(std::size_t n, QuadratureSpec const& q, bool doubled)
{
    if (q.scheme == QuadratureScheme::gauss_hermite)
        return tensor_nodes(n, doubled ? 2 * q.order : q.order, q.beta);
    return sample_nodes(n, doubled ? 2 * q.samples : q.samples, q.beta, q.seed + (doubled ? 1 : 0));
}

// Deterministic parallel sum of fn(k) over k in [0, n): per-item values are
// stored and added in index order.
template <class Fn>
double ordered_sum(std::size_t n, std::size_t workers, Fn&& fn)
{
    std::vector<double> values(n);
    parallel_blocks(n, kGridBlock, workers, [&](std::size_t, std::size_t begin, std::size_t end) {
        for (std::size_t k = begin; k < end; ++k)
            values[k] = fn(k);
    });
    double total = 0.0;
    for (double x : values)
        total += x;
    return total;
}

struct Shift
{
    double decay;  // exp(-s)
    double noise;  // sqrt(1 - exp(-2s))
};

Shift shift_for(double s)
{
    return {std::exp(-s), std::sqrt(-std::expm1(-2.0 * s))};
}

double average_value(ScalarField const& h, NodeSet const& nodes, Shift sh, std::span<double const> v)
{
    std::vector<double> x(v.size());
    double total = 0.0;
    for (std::size_t k = 0; k < nodes.size(); ++k)
    {
        auto const p = nodes.point(k);
        for (std::size_t c = 0; c < x.size(); ++c)
            x[c] = sh.decay * v[c] + sh.noise * p[c];
        total += nodes.weights[k] * h.value(x);
    }
    return total;
}

void check_dim(ScalarField const& h, std::span<double const> v, char const* who)
{
    if (v.size() != h.dim)
        throw std::invalid_argument(std::string(who) + ": point dimension does not match the field");
}

} // namespace

ScalarField constant_field(std::size_t n, double c)
{
    ScalarField f;
    f.dim = n;
    f.value = [c](std::span<double const>) { return c; };
    f.gradient = [](std::span<double const>, std::span<double> out) { std::fill(out.begin(), out.end(), 0.0); };
    f.laplacian = [](std::span<double const>) { return 0.0; };
    return f;
}

ScalarField gaussian_ratio_field(GaussianComponent const& f, double beta)
{
    f.validate();
    if (!(beta > 0.0))
        throw std::invalid_argument("gaussian_ratio_field: beta must be positive");
    struct Data
    {
        Eigen::VectorXd mean;
        Eigen::MatrixXd precision;
        double log_const;  // ln of normalizations, f's over gamma's
        double beta;
        double trace_term;  // tr(beta I - precision)
    };
    auto data = std::make_shared<Data>();
    auto const n = f.mean.size();
    Eigen::LLT<Eigen::MatrixXd> llt(f.covariance);
    double log_det = 0.0;
    for (Eigen::Index r = 0; r < n; ++r)
        log_det += 2.0 * std::log(llt.matrixLLT()(r, r));
    data->mean = f.mean;
    data->precision = llt.solve(Eigen::MatrixXd::Identity(n, n));
    data->beta = beta;
    data->log_const = -0.5 * log_det - 0.5 * static_cast<double>(n) * std::log(beta);
    data->trace_term = beta * static_cast<double>(n) - data->precision.trace();

    auto log_h_and_score = [data](std::span<double const> v, Eigen::VectorXd* score) {
        Eigen::Map<Eigen::VectorXd const> x(v.data(), static_cast<Eigen::Index>(v.size()));
        Eigen::VectorXd const delta = x - data->mean;
        Eigen::VectorXd const u = data->precision * delta;
        if (score)
            *score = data->beta * x - u;
        return data->log_const - 0.5 * delta.dot(u) + 0.5 * data->beta * x.squaredNorm();
    };

    ScalarField h;
    h.dim = static_cast<std::size_t>(n);
    h.value = [log_h_and_score](std::span<double const> v) { return std::exp(log_h_and_score(v, nullptr)); };
    h.gradient = [log_h_and_score](std::span<double const> v, std::span<double> out) {
        Eigen::VectorXd score;
        double const value = std::exp(log_h_and_score(v, &score));
        for (std::size_t k = 0; k < out.size(); ++k)
            out[k] = value * score(static_cast<Eigen::Index>(k));
    };
    h.laplacian = [log_h_and_score, data](std::span<double const> v) {
        Eigen::VectorXd score;
        double const value = std::exp(log_h_and_score(v, &score));
        return value * (score.squaredNorm() + data->trace_term);
    };
    return h;
}

GaussianComponent ou_evolve_gaussian(GaussianComponent const& f, double s, double beta)
{
    if (!(s >= 0.0) || !(beta > 0.0))
        throw std::invalid_argument("ou_evolve_gaussian: need s >= 0 and beta > 0");
    auto const n = f.mean.size();
    double const decay = std::exp(-s);
    GaussianComponent out;
    out.mean = decay * f.mean;
    out.covariance = decay * decay * f.covariance - std::expm1(-2.0 * s) / beta * Eigen::MatrixXd::Identity(n, n);
    return out;
}

void finite_difference_gradient(ScalarField const& h, std::span<double const> v, std::span<double> out)
{
    check_dim(h, v, "finite_difference_gradient");
    std::vector<double> x(v.begin(), v.end());
    for (std::size_t k = 0; k < v.size(); ++k)
    {
        double const step = 1e-5 * std::max(1.0, std::abs(v[k]));
        x[k] = v[k] + step;
        double const up = h.value(x);
        x[k] = v[k] - step;
        double const down = h.value(x);
        x[k] = v[k];
        out[k] = (up - down) / (2.0 * step);
    }
}

double finite_difference_laplacian(ScalarField const& h, std::span<double const> v)
{
    check_dim(h, v, "finite_difference_laplacian");
    // Second differences lose twice the digits, hence the wider step.
    std::vector<double> x(v.begin(), v.end());
    double const center = h.value(x);
    double total = 0.0;
    for (std::size_t k = 0; k < v.size(); ++k)
    {
        double const step = 1e-4 * std::max(1.0, std::abs(v[k]));
        x[k] = v[k] + step;
        double const up = h.value(x);
        x[k] = v[k] - step;
        double const down = h.value(x);
        x[k] = v[k];
        total += (up - 2.0 * center + down) / (step * step);
    }
    return total;
}

void QuadratureSpec::validate() const
{
    if (order < 1)
        throw std::invalid_argument("QuadratureSpec: order must be >= 1");
    if (scheme == QuadratureScheme::monte_carlo && samples < 1)
        throw std::invalid_argument("QuadratureSpec: samples must be >= 1");
    if (!(beta > 0.0))
        throw std::invalid_argument("QuadratureSpec: beta must be positive");
    if (eval_order < 1)
        throw std::invalid_argument("QuadratureSpec: eval_order must be >= 1");
    if (!(tolerance > 0.0))
        throw std::invalid_argument("QuadratureSpec: tolerance must be positive");
}

QuadratureSpec QuadratureSpec::defaults_for(std::size_t n, double beta)
{
    QuadratureSpec q;
    q.beta = beta;
    if (n > 2)
        q.scheme = QuadratureScheme::monte_carlo;
    return q;
}

ScalarField ou_apply(ScalarField const& h, double s, QuadratureSpec const& q)
{
    q.validate();
    if (!(s >= 0.0) || !std::isfinite(s))
        throw std::invalid_argument("ou_apply: s must be finite and non-negative");
    if (s == 0.0)
        return h;

    auto const nodes = nodes_for(h.dim, q, false);
    auto const fine = q.verify_resolution ? nodes_for(h.dim, q, true) : nullptr;
    Shift const sh = shift_for(s);
    double const tol = q.tolerance;

    ScalarField out;
    out.dim = h.dim;
    out.value = [h, nodes, fine, sh, tol](std::span<double const> v) {
        check_dim(h, v, "ou_apply");
        double const coarse = average_value(h, *nodes, sh, v);
        if (fine)
        {
            double const refined = average_value(h, *fine, sh, v);
            if (std::abs(refined - coarse) > tol * std::max(1.0, std::abs(refined)))
                throw UnderResolvedError("ou_apply: order doubling changed the value by " +
                                         std::to_string(std::abs(refined - coarse)));
        }
        return coarse;
    };
    if (h.gradient)
    {
        out.gradient = [h, nodes, sh](std::span<double const> v, std::span<double> g) {
            std::vector<double> x(v.size());
            std::vector<double> gx(v.size());
            std::fill(g.begin(), g.end(), 0.0);
            for (std::size_t k = 0; k < nodes->size(); ++k)
            {
                auto const p = nodes->point(k);
                for (std::size_t c = 0; c < x.size(); ++c)
                    x[c] = sh.decay * v[c] + sh.noise * p[c];
                h.gradient(x, gx);
                for (std::size_t c = 0; c < g.size(); ++c)
                    g[c] += nodes->weights[k] * gx[c];
            }
            for (double& c : g)
                c *= sh.decay;
        };
    }
    if (h.laplacian)
    {
        ScalarField lap{h.dim, h.laplacian, {}, {}};
        out.laplacian = [lap, nodes, sh](std::span<double const> v) {
            return sh.decay * sh.decay * average_value(lap, *nodes, sh, v);
        };
    }
    return out;
}

ScalarField ou_generator_apply(ScalarField const& h, double beta)
{
    if (!(beta > 0.0))
        throw std::invalid_argument("ou_generator_apply: beta must be positive");
    ScalarField out;
    out.dim = h.dim;
    out.value = [h, beta](std::span<double const> v) {
        check_dim(h, v, "ou_generator_apply");
        std::vector<double> g(v.size());
        if (h.gradient)
            h.gradient(v, g);
        else
            finite_difference_gradient(h, v, g);
        double const lap = h.laplacian ? h.laplacian(v) : finite_difference_laplacian(h, v);
        double drift = 0.0;
        for (std::size_t k = 0; k < v.size(); ++k)
            drift += v[k] * g[k];
        return lap / beta - drift;
    };
    return out;
}

double grid_residual(ScalarField const& a, ScalarField const& b, QuadratureSpec const& q)
{
    q.validate();
    if (a.dim != b.dim)
        throw std::invalid_argument("grid_residual: fields differ in dimension");
    auto const grid = tensor_nodes(a.dim, q.eval_order, q.beta);
    double const sq = ordered_sum(grid->size(), q.workers, [&](std::size_t k) {
        double const diff = a.value(grid->point(k)) - b.value(grid->point(k));
        return grid->weights[k] * diff * diff;
    });
    return std::sqrt(sq);
}

double gamma_mean(ScalarField const& h, QuadratureSpec const& q)
{
    q.validate();
    auto const nodes = tensor_nodes(h.dim, q.order, q.beta);
    return ordered_sum(nodes->size(), q.workers,
                       [&](std::size_t k) { return nodes->weights[k] * h.value(nodes->point(k)); });
}

double check_semigroup(ScalarField const& h, double s, double t, QuadratureSpec const& q)
{
    ScalarField const lhs = ou_apply(ou_apply(h, t, q), s, q);
    ScalarField const rhs = ou_apply(h, s + t, q);
    return grid_residual(lhs, rhs, q);
}

double check_self_adjoint(ScalarField const& F, ScalarField const& G, double s, QuadratureSpec const& q)
{
    if (F.dim != G.dim)
        throw std::invalid_argument("check_self_adjoint: fields differ in dimension");
    ScalarField const PF = ou_apply(F, s, q);
    ScalarField const PG = ou_apply(G, s, q);
    ScalarField left{F.dim, [&](std::span<double const> v) { return PF.value(v) * G.value(v); }, {}, {}};
    ScalarField right{F.dim, [&](std::span<double const> v) { return F.value(v) * PG.value(v); }, {}, {}};
    return std::abs(gamma_mean(left, q) - gamma_mean(right, q));
}

double check_gamma_invariance(ScalarField const& h, double s, QuadratureSpec const& q)
{
    return std::abs(gamma_mean(ou_apply(h, s, q), q) - gamma_mean(h, q));
}

void CollisionOp::validate() const
{
    if (d < 1 || d > 3)
        throw std::invalid_argument("CollisionOp: d must be 1, 2 or 3");
    if (sigma_order < 1 || partner_order < 1)
        throw std::invalid_argument("CollisionOp: quadrature orders must be >= 1");
    switch (kind)
    {
    case CollisionOpKind::q_average:
        if (n_particles < 2)
            throw std::invalid_argument("CollisionOp: q_average needs at least two particles");
        break;
    case CollisionOpKind::thermostat:
        if (j >= n_particles)
            throw std::invalid_argument("CollisionOp: thermostat particle out of range");
        break;
    case CollisionOpKind::reservoir_pair:
        if (!(i < j) || j >= n_particles)
            throw std::invalid_argument("CollisionOp: reservoir pair needs i < j < n_particles");
        break;
    case CollisionOpKind::marginal:
        if (n_system < 1 || n_system >= n_particles)
            throw std::invalid_argument("CollisionOp: marginal needs 1 <= n_system < n_particles");
        break;
    }
}

std::size_t CollisionOp::output_dim() const
{
    return kind == CollisionOpKind::marginal ? d * n_system : d * n_particles;
}

std::vector<SigmaNode> sigma_rule(std::size_t d, std::size_t order)
{
    std::vector<SigmaNode> out;
    switch (d)
    {
    case 1:
        out.push_back({{1.0}, 0.5});
        out.push_back({{-1.0}, 0.5});
        break;
    case 2:
        // sigma and -sigma give the same reflection, so a half circle suffices.
        for (std::size_t k = 0; k < order; ++k)
        {
            double const th = std::numbers::pi * static_cast<double>(k) / static_cast<double>(order);
            out.push_back({{std::cos(th), std::sin(th)}, 1.0 / static_cast<double>(order)});
        }
        break;
    case 3:
    {
        GaussRule const z = gauss_legendre(order);
        std::size_t const n_phi = 2 * order;
        for (std::size_t a = 0; a < z.order(); ++a)
        {
            double const r = std::sqrt(std::max(0.0, 1.0 - z.nodes[a] * z.nodes[a]));
            for (std::size_t b = 0; b < n_phi; ++b)
            {
                double const phi = 2.0 * std::numbers::pi * static_cast<double>(b) / static_cast<double>(n_phi);
                out.push_back({{r * std::cos(phi), r * std::sin(phi), z.nodes[a]},
                               0.5 * z.weights[a] / static_cast<double>(n_phi)});
            }
        }
        break;
    }
    default:
        throw std::invalid_argument("sigma_rule: d must be 1, 2 or 3");
    }
    return out;
}

ScalarField apply_collision_op(ScalarField const& h, CollisionOp const& op, double beta)
{
    op.validate();
    if (h.dim != op.input_dim())
        throw std::invalid_argument("apply_collision_op: field dimension does not match the operator");
    auto const sigmas = std::make_shared<std::vector<SigmaNode> const>(sigma_rule(op.d, op.sigma_order));
    std::size_t const d = op.d;

    ScalarField out;
    out.dim = op.output_dim();
    switch (op.kind)
    {
    case CollisionOpKind::q_average:
    case CollisionOpKind::reservoir_pair:
    {
        std::vector<std::pair<std::size_t, std::size_t>> pairs;
        if (op.kind == CollisionOpKind::reservoir_pair)
            pairs.emplace_back(op.i, op.j);
        else
            for (std::size_t a = 0; a < op.n_particles; ++a)
                for (std::size_t b = a + 1; b < op.n_particles; ++b)
                    pairs.emplace_back(a, b);
        double const pair_weight = 1.0 / static_cast<double>(pairs.size());
        out.value = [h, sigmas, pairs, pair_weight, d](std::span<double const> v) {
            std::vector<double> x(v.size());
            double total = 0.0;
            for (auto const& [a, b] : pairs)
                for (auto const& node : *sigmas)
                {
                    std::copy(v.begin(), v.end(), x.begin());
                    reflect({x.data() + a * d, d}, {x.data() + b * d, d}, node.sigma);
                    total += pair_weight * node.weight * h.value(x);
                }
            return total;
        };
        break;
    }
    case CollisionOpKind::thermostat:
    {
        auto const partners = tensor_nodes(d, op.partner_order, beta);
        std::size_t const j = op.j;
        out.value = [h, sigmas, partners, j, d](std::span<double const> v) {
            std::vector<double> x(v.size());
            std::vector<double> w(d);
            double total = 0.0;
            for (auto const& node : *sigmas)
                for (std::size_t k = 0; k < partners->size(); ++k)
                {
                    std::copy(v.begin(), v.end(), x.begin());
                    auto const p = partners->point(k);
                    std::copy(p.begin(), p.end(), w.begin());
                    reflect({x.data() + j * d, d}, w, node.sigma);
                    total += node.weight * partners->weights[k] * h.value(x);
                }
            return total;
        };
        break;
    }
    case CollisionOpKind::marginal:
    {
        std::size_t const n_out = out.dim;
        auto const rest = tensor_nodes(h.dim - n_out, op.partner_order, beta);
        out.value = [h, rest, n_out](std::span<double const> u) {
            std::vector<double> x(h.dim);
            std::copy(u.begin(), u.end(), x.begin());
            double total = 0.0;
            for (std::size_t k = 0; k < rest->size(); ++k)
            {
                auto const p = rest->point(k);
                std::copy(p.begin(), p.end(), x.begin() + static_cast<std::ptrdiff_t>(n_out));
                total += rest->weights[k] * h.value(x);
            }
            return total;
        };
        break;
    }
    }
    return out;
}

double check_commutation(ScalarField const& h, double s, CollisionOp const& op, QuadratureSpec const& q)
{
    ScalarField const lhs = ou_apply(apply_collision_op(h, op, q.beta), s, q);
    ScalarField const rhs = apply_collision_op(ou_apply(h, s, q), op, q.beta);
    return grid_residual(lhs, rhs, q);
}

std::vector<double> commutation_refinement(ScalarField const& h, double s, CollisionOp const& op, QuadratureSpec q,
                                           std::vector<std::size_t> const& orders)
{
    std::vector<double> out;
    for (std::size_t order : orders)
    {
        q.order = order;
        out.push_back(check_commutation(h, s, op, q));
    }
    return out;
}

bool nonincreasing_with_floor(std::vector<double> const& residuals, double floor)
{
    for (std::size_t k = 1; k < residuals.size(); ++k)
        if (residuals[k] > residuals[k - 1] && residuals[k] > floor)
            return false;
    return true;
}

double fisher_info_quadrature(ScalarField const& h, QuadratureSpec const& q)
{
    q.validate();
    auto const nodes = tensor_nodes(h.dim, q.order, q.beta);
    return ordered_sum(nodes->size(), q.workers, [&](std::size_t k) {
        auto const v = nodes->point(k);
        std::vector<double> g(h.dim);
        if (h.gradient)
            h.gradient(v, g);
        else
            finite_difference_gradient(h, v, g);
        double norm2 = 0.0;
        for (double x : g)
            norm2 += x * x;
        if (norm2 == 0.0)
            return 0.0;
        double const value = h.value(v);
        if (!(value > 0.0))
            throw std::domain_error("fisher_info_quadrature: field is not positive at a node");
        return nodes->weights[k] * norm2 / value;
    });
}

std::function<double(double)> information_curve(ScalarField const& h, QuadratureSpec const& q)
{
    return [h, q](double s) { return fisher_info_quadrature(ou_apply(h, s, q), q); };
}

EntropyFromInformation entropy_from_information(std::function<double(double)> const& curve, double beta,
                                                SIntegration const& spec)
{
    if (!(beta > 0.0) || !(spec.s_max > 0.0) || spec.panels < 1 || spec.order < 1)
        throw std::invalid_argument("entropy_from_information: invalid integration settings");
    GaussRule const rule = gauss_legendre(spec.order);
    double const width = spec.s_max / static_cast<double>(spec.panels);

    auto checked = [&](double s) {
        double const value = curve(s);
        if (!std::isfinite(value) || value < 0.0)
            throw NonDecayingCurveError("entropy_from_information: information curve is negative or non-finite");
        return value;
    };

    EntropyFromInformation out;
    for (std::size_t p = 0; p < spec.panels; ++p)
    {
        double const mid = (static_cast<double>(p) + 0.5) * width;
        for (std::size_t k = 0; k < rule.order(); ++k)
            out.integral += 0.5 * width * rule.weights[k] * checked(mid + 0.5 * width * rule.nodes[k]);
    }
    double const last = checked(spec.s_max);
    double const before = checked(spec.s_max - width);
    if (last > before)
        throw NonDecayingCurveError("entropy_from_information: information curve is not decaying at s_max");
    // c exp(-2s) through the endpoint, integrated over [s_max, inf).
    out.tail = 0.5 * last;
    out.entropy = (out.integral + out.tail) / beta;
    return out;
}

} // namespace kac

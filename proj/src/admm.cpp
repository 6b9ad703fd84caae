#include "idnet/admm.hpp"

#include "idnet/prox.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

namespace idnet {

char const *to_string(E2Mode mode) { return mode == E2Mode::corrected ? "corrected" : "paper"; }

E2Mode e2_mode_from_string(std::string const &name)
{
  if (name == "corrected") { return E2Mode::corrected; }
  if (name == "paper") { return E2Mode::paper; }
  throw ArgumentError("unknown e2 mode '" + name + "' (expected corrected|paper)");
}

void ModelParams::validate(std::size_t bank_width) const
{
  if (alphas.size() != bank_width) {
    throw ArgumentError("model params: " + std::to_string(alphas.size()) + " alphas for a bank of width " +
                        std::to_string(bank_width));
  }
  for (double a : alphas) {
    if (!(a >= 0.0) || !std::isfinite(a)) { throw ArgumentError("model params: alphas must be finite and >= 0"); }
  }
  if (!(beta >= 0.0) || !std::isfinite(beta)) { throw ArgumentError("model params: beta must be finite and >= 0"); }
  if (!(r_p > 0.0) || !std::isfinite(r_p)) { throw ArgumentError("model params: r_p must be > 0"); }
  if (!(r_q > 0.0) || !std::isfinite(r_q)) { throw ArgumentError("model params: r_q must be > 0"); }
}

SolverState SolverState::zeros(std::size_t M, Index height, Index width)
{
  SolverState s;
  s.p = zero_stack<double>(M, height, width);
  s.lambda_hat = zero_stack<double>(M, height, width);
  s.q = Grid::Zero(height, width);
  s.mu_hat = Grid::Zero(height, width);
  s.u = Grid::Zero(height, width);
  s.v = Grid::Zero(height, width);
  return s;
}

void SolverState::validate(std::size_t M, Index height, Index width) const
{
  if (p.size() != M || lambda_hat.size() != M) {
    throw ShapeError("solver state: expected " + std::to_string(M) + " channels in p and lambda_hat");
  }
  auto check = [&](Grid const &g, char const *name) {
    if (g.rows() != height || g.cols() != width) {
      throw ShapeError(std::string("solver state: ") + name + " is " + detail::dims(g.rows(), g.cols()) +
                       ", expected " + detail::dims(height, width));
    }
  };
  for (auto const &g : p) { check(g, "p"); }
  for (auto const &g : lambda_hat) { check(g, "lambda_hat"); }
  check(q, "q");
  check(mu_hat, "mu_hat");
}

LayerOperator::LayerOperator(KernelBank bank, double r_p, double r_q, E2Mode mode, Index height, Index width)
  : bank_{std::move(bank)}
  , r_p_{r_p}
  , r_q_{r_q}
  , e2_{mode == E2Mode::corrected ? 1.0 + r_q : r_q}
{
  if (bank_.width() == 0) { throw ArgumentError("layer operator: empty kernel bank"); }
  e1_hat_ = Grid::Ones(height, width);
  otfs_.reserve(bank_.width());
  for (auto const &k : bank_) {
    otfs_.push_back(kernel_otf(k, height, width));
    e1_hat_ += r_p_ * otfs_.back().power();
  }
}

LssOperators assemble_lss(Grid const &f, SolverState const &state, LayerOperator const &op)
{
  state.validate(op.bank().width(), f.rows(), f.cols());
  LssOperators lss;
  lss.e1_hat = op.e1_hat();
  lss.e2_scalar = op.e2();
  lss.b1 = f;
  for (std::size_t m = 0; m < op.bank().width(); m++) {
    lss.b1 += op.r_p() * adjoint_conv<double>(state.p[m] - state.lambda_hat[m], op.bank()[m]);
  }
  lss.b2 = f + op.r_q() * (state.q - state.mu_hat);
  return lss;
}

std::pair<Grid, Grid> lss_solve(Grid const &f, SolverState const &state, LayerOperator const &op)
{
  if (f.rows() != op.height() || f.cols() != op.width()) {
    throw ShapeError("lss_solve: image " + detail::dims(f.rows(), f.cols()) + " vs operator " +
                     detail::dims(op.height(), op.width()));
  }
  LssOperators const lss = assemble_lss(f, state, op);

  // u = (E2 E1 - I)^{-1} (E2 b1 - b2), diagonal in frequency.
  Grid const denom = lss.e2_scalar * lss.e1_hat - 1.0;
  if ((denom.abs() < 1e-12).any()) { throw NumericalError("lss_solve: singular per-frequency coefficient"); }
  Spectrum const rhs = fft2(Grid(lss.e2_scalar * lss.b1 - lss.b2));
  Spectrum const u_hat = rhs / denom.cast<Complex>();
  Grid       u = ifft2_real(u_hat);
  Grid const e1u = ifft2_real(u_hat * lss.e1_hat.cast<Complex>());
  Grid       v = lss.b1 - e1u;
  return {std::move(u), std::move(v)};
}

std::pair<Grid, Grid> lss_solve(Grid const &f, SolverState const &state, KernelBank const &bank,
                                ModelParams const &params)
{
  params.validate(bank.width());
  LayerOperator const op(bank, params.r_p, params.r_q, params.e2_mode, f.rows(), f.cols());
  return lss_solve(f, state, op);
}

std::pair<GridStack, GridStack> avmu_u(Grid const &u_new, SolverState const &state, KernelBank const &bank,
                                       ModelParams const &params)
{
  params.validate(bank.width());
  state.validate(bank.width(), u_new.rows(), u_new.cols());
  GridStack p(bank.width());
  GridStack lambda(bank.width());
  for (std::size_t m = 0; m < bank.width(); m++) {
    Grid const e = conv_periodic(u_new, bank[m]);
    Grid const shifted = e + state.lambda_hat[m];
    p[m] = soft_threshold(shifted, params.alphas[m] / params.r_p);
    lambda[m] = shifted - p[m];
  }
  return {std::move(p), std::move(lambda)};
}

std::pair<Grid, Grid> avmu_v(Grid const &v_new, SolverState const &state, ModelParams const &params)
{
  require_same_shape(v_new, state.q, "avmu_v");
  require_same_shape(v_new, state.mu_hat, "avmu_v");
  Grid const shifted = v_new + state.mu_hat;
  Grid       q = soft_threshold(shifted, params.beta / params.r_q);
  Grid       mu = shifted - q;
  return {std::move(q), std::move(mu)};
}

SolverState admm_step(Grid const &f, SolverState const &state, LayerOperator const &op, ModelParams const &params)
{
  SolverState next;
  std::tie(next.u, next.v) = lss_solve(f, state, op);
  std::tie(next.p, next.lambda_hat) = avmu_u(next.u, state, op.bank(), params);
  std::tie(next.q, next.mu_hat) = avmu_v(next.v, state, params);
  next.iteration = state.iteration + 1;
  return next;
}

double objective(Grid const &u, Grid const &v, Grid const &f, KernelBank const &bank, ModelParams const &params)
{
  params.validate(bank.width());
  require_same_shape(u, f, "objective");
  require_same_shape(v, f, "objective");
  double value = params.beta * norm1(v) + 0.5 * (u + v - f).square().sum();
  for (std::size_t m = 0; m < bank.width(); m++) {
    value += params.alphas[m] * norm1(conv_periodic(u, bank[m]));
  }
  return value;
}

double augmented_lagrangian(Grid const &u, Grid const &v, SolverState const &state, Grid const &f,
                            KernelBank const &bank, ModelParams const &params)
{
  params.validate(bank.width());
  state.validate(bank.width(), f.rows(), f.cols());
  require_same_shape(u, f, "augmented_lagrangian");
  require_same_shape(v, f, "augmented_lagrangian");
  double value = params.beta * norm1(state.q) + 0.5 * params.r_q * (v - state.q + state.mu_hat).square().sum() -
                 0.5 * params.r_q * state.mu_hat.square().sum();
  for (std::size_t m = 0; m < bank.width(); m++) {
    Grid const Ku = conv_periodic(u, bank[m]);
    value += params.alphas[m] * norm1(state.p[m]) +
             0.5 * params.r_p * (Ku - state.p[m] + state.lambda_hat[m]).square().sum() -
             0.5 * params.r_p * state.lambda_hat[m].square().sum();
  }
  value += 0.5 * (u + v - f).square().sum();
  return value;
}

std::pair<Grid, Grid> augmented_lagrangian_gradient(Grid const &u, Grid const &v, SolverState const &state,
                                                    Grid const &f, KernelBank const &bank, ModelParams const &params)
{
  params.validate(bank.width());
  state.validate(bank.width(), f.rows(), f.cols());
  Grid const fidelity = u + v - f;
  Grid       gu = fidelity;
  for (std::size_t m = 0; m < bank.width(); m++) {
    Grid const Ku = conv_periodic(u, bank[m]);
    gu += params.r_p * adjoint_conv<double>(Ku - state.p[m] + state.lambda_hat[m], bank[m]);
  }
  Grid gv = fidelity + params.r_q * (v - state.q + state.mu_hat);
  return {std::move(gu), std::move(gv)};
}

Residuals residuals(SolverState const &prev, SolverState const &next, KernelBank const &bank,
                    ModelParams const &params)
{
  Residuals r;
  double    dual_p = 0.0;
  for (std::size_t m = 0; m < bank.width(); m++) {
    r.primal_p = std::max(r.primal_p, norm2(conv_periodic(next.u, bank[m]) - next.p[m]));
    dual_p = std::max(dual_p, norm2(adjoint_conv<double>(next.p[m] - prev.p[m], bank[m])));
  }
  r.primal_q = norm2(next.v - next.q);
  r.dual = params.r_p * dual_p + params.r_q * norm2(next.q - prev.q);
  return r;
}

namespace {

bool state_finite(SolverState const &s)
{
  if (!all_finite(s.u) || !all_finite(s.v) || !all_finite(s.q) || !all_finite(s.mu_hat)) { return false; }
  for (auto const &g : s.p) {
    if (!all_finite(g)) { return false; }
  }
  for (auto const &g : s.lambda_hat) {
    if (!all_finite(g)) { return false; }
  }
  return true;
}

// Largest violation of the subgradient condition  r * hat in weight * d|x|.
double multiplier_violation(Grid const &x, Grid const &hat, double r, double weight)
{
  double worst = 0.0;
  for (Index i = 0; i < x.size(); i++) {
    double const y = r * hat(i);
    double       gap;
    if (x(i) > 0.0) {
      gap = std::abs(y - weight);
    } else if (x(i) < 0.0) {
      gap = std::abs(y + weight);
    } else {
      gap = std::max(0.0, std::abs(y) - weight);
    }
    worst = std::max(worst, gap);
  }
  return worst;
}

} // namespace

DecompositionResult admm_solve(Grid const &f, KernelBank const &bank, ModelParams const &params,
                               StoppingRule const &stop)
{
  params.validate(bank.width());
  if (stop.max_iterations < 1) { throw ArgumentError("admm_solve: max iterations must be >= 1"); }
  if (stop.tolerance && !(*stop.tolerance >= 0.0)) { throw ArgumentError("admm_solve: tolerance must be >= 0"); }
  if (!all_finite(f)) { throw ArgumentError("admm_solve: input image has non-finite values"); }

  LayerOperator const op(bank, params.r_p, params.r_q, params.e2_mode, f.rows(), f.cols());
  DecompositionResult result;
  SolverState         state = SolverState::zeros(bank.width(), f.rows(), f.cols());
  for (long l = 0; l < stop.max_iterations; l++) {
    SolverState next = admm_step(f, state, op, params);
    if (!state_finite(next)) { throw DivergenceError(next.iteration, "non-finite iterate"); }
    Residuals const r = residuals(state, next, bank, params);
    result.objective_trace.push_back(objective(next.u, next.v, f, bank, params));
    result.primal_residual_p.push_back(r.primal_p);
    result.primal_residual_q.push_back(r.primal_q);
    result.dual_residual.push_back(r.dual);
    state = std::move(next);
    result.iterations_run++;
    if (stop.tolerance && std::max(r.primal_p, r.primal_q) <= *stop.tolerance) { break; }
  }
  result.u = state.u;
  result.v = state.v;
  result.state = std::move(state);
  result.kkt = kkt_check(result, f, bank, params);
  return result;
}

KktReport kkt_check(DecompositionResult const &result, Grid const &f, KernelBank const &bank,
                    ModelParams const &params)
{
  params.validate(bank.width());
  SolverState const &s = result.state;
  s.validate(bank.width(), f.rows(), f.cols());
  KktReport report;
  for (std::size_t m = 0; m < bank.width(); m++) {
    report.feasibility_p = std::max(report.feasibility_p, norm_inf(conv_periodic(result.u, bank[m]) - s.p[m]));
    report.multiplier_bound_p =
      std::max(report.multiplier_bound_p, multiplier_violation(s.p[m], s.lambda_hat[m], params.r_p, params.alphas[m]));
  }
  report.feasibility_q = norm_inf(result.v - s.q);
  report.multiplier_bound_q = multiplier_violation(s.q, s.mu_hat, params.r_q, params.beta);
  report.stationarity_u = norm_inf(augmented_lagrangian_gradient(result.u, result.v, s, f, bank, params).first);
  return report;
}

} // namespace idnet

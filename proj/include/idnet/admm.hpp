#pragma once

#include "conv.hpp"
#include "grid.hpp"
#include "kernel.hpp"

#include <optional>
#include <utility>
#include <vector>

namespace idnet {

// Which v-block the (u, v) linear solve uses.
//   corrected: E2 = (1 + r_q) I, the exact minimizer of the scaled augmented Lagrangian.
//   paper:     E2 = r_q I, kept for side-by-side comparison only.
enum class E2Mode
{
  corrected,
  paper
};

char const *to_string(E2Mode mode);
E2Mode      e2_mode_from_string(std::string const &name);

struct ModelParams
{
  std::vector<double> alphas; // one weight per kernel in the bank
  double              beta = 0.0;
  double              r_p = 0.07;
  double              r_q = 0.07;
  E2Mode              e2_mode = E2Mode::corrected;

  void   validate(std::size_t bank_width) const;
  double e2() const { return e2_mode == E2Mode::corrected ? 1.0 + r_q : r_q; }
};

struct StoppingRule
{
  long                  max_iterations = 100;
  std::optional<double> tolerance; // on max(primal_p, primal_q)
};

// One scaled-ADMM iterate. lambda_hat = lambda / r_p, mu_hat = mu / r_q.
struct SolverState
{
  GridStack p;
  Grid      q;
  GridStack lambda_hat;
  Grid      mu_hat;
  Grid      u;
  Grid      v;
  long      iteration = 0;

  static SolverState zeros(std::size_t M, Index height, Index width);
  void               validate(std::size_t M, Index height, Index width) const;
};

// Per-frequency description of the (u, v) system
//   [E1 I; I E2] [u; v] = [b1; b2],  E1 = sum_m r_p K_m^T K_m + I,  E2 = e2 I.
struct LssOperators
{
  Grid   e1_hat; // 1 + r_p sum_m |K_m^|^2
  double e2_scalar = 0.0;
  Grid   b1;
  Grid   b2;
};

// Everything about one layer's linear solve that does not depend on the
// iterate: the bank, its OTFs and e1_hat. Rebuilt only when kernels change.
class LayerOperator
{
public:
  LayerOperator(KernelBank bank, double r_p, double r_q, E2Mode mode, Index height, Index width);

  KernelBank const       &bank() const { return bank_; }
  std::vector<Otf> const &otfs() const { return otfs_; }
  Grid const             &e1_hat() const { return e1_hat_; }
  double                  r_p() const { return r_p_; }
  double                  r_q() const { return r_q_; }
  double                  e2() const { return e2_; }
  Index                   height() const { return e1_hat_.rows(); }
  Index                   width() const { return e1_hat_.cols(); }

private:
  KernelBank       bank_;
  std::vector<Otf> otfs_;
  Grid             e1_hat_;
  double           r_p_;
  double           r_q_;
  double           e2_;
};

LssOperators assemble_lss(Grid const &f, SolverState const &state, LayerOperator const &op);

std::pair<Grid, Grid> lss_solve(Grid const &f, SolverState const &state, LayerOperator const &op);
std::pair<Grid, Grid> lss_solve(Grid const &f, SolverState const &state, KernelBank const &bank,
                                ModelParams const &params);

// p_m = S(K_m u + lambda_hat_m; alpha_m / r_p), lambda_hat_m += K_m u - p_m.
std::pair<GridStack, GridStack> avmu_u(Grid const &u_new, SolverState const &state, KernelBank const &bank,
                                       ModelParams const &params);
// q = S(v + mu_hat; beta / r_q), mu_hat += v - q.
std::pair<Grid, Grid> avmu_v(Grid const &v_new, SolverState const &state, ModelParams const &params);

// One full iteration: LSS block then both AVMU blocks. `params` supplies the
// thresholds; the linear solve uses `op`.
SolverState admm_step(Grid const &f, SolverState const &state, LayerOperator const &op, ModelParams const &params);

double objective(Grid const &u, Grid const &v, Grid const &f, KernelBank const &bank, ModelParams const &params);

double augmented_lagrangian(Grid const &u, Grid const &v, SolverState const &state, Grid const &f,
                            KernelBank const &bank, ModelParams const &params);

// (d/du, d/dv) of the scaled augmented Lagrangian at (u, v) with the p, q,
// lambda_hat, mu_hat of `state`.
std::pair<Grid, Grid> augmented_lagrangian_gradient(Grid const &u, Grid const &v, SolverState const &state,
                                                    Grid const &f, KernelBank const &bank, ModelParams const &params);

struct Residuals
{
  double primal_p = 0.0; // max_m ||K_m u - p_m||_2
  double primal_q = 0.0; // ||v - q||_2
  double dual = 0.0;     // r_p max_m ||K_m^T (p_m - p_m^prev)||_2 + r_q ||q - q^prev||_2
};

Residuals residuals(SolverState const &prev, SolverState const &next, KernelBank const &bank,
                    ModelParams const &params);

struct KktReport
{
  double feasibility_p = 0.0;
  double feasibility_q = 0.0;
  double stationarity_u = 0.0;
  double multiplier_bound_p = 0.0;
  double multiplier_bound_q = 0.0;
};

struct DecompositionResult
{
  Grid                u;
  Grid                v;
  std::vector<double> objective_trace;
  std::vector<double> primal_residual_p;
  std::vector<double> primal_residual_q;
  std::vector<double> dual_residual;
  long                iterations_run = 0;
  KktReport           kkt;
  SolverState         state; // final (p, q, lambda_hat, mu_hat)
};

DecompositionResult admm_solve(Grid const &f, KernelBank const &bank, ModelParams const &params,
                               StoppingRule const &stop);

KktReport kkt_check(DecompositionResult const &result, Grid const &f, KernelBank const &bank,
                    ModelParams const &params);

} // namespace idnet

#pragma once

#include "admm.hpp"

#include <functional>
#include <iosfwd>
#include <optional>
#include <string>

namespace idnet {

inline constexpr char const *kBundleVersion = "idnet-bundle/1";

// Parameters of an L-layer unrolled network: per-layer kernels, alphas and
// betas; r_p, r_q shared across layers.
struct ParameterBundle
{
  std::size_t                      M = 0;
  std::size_t                      L = 0;
  Index                            R = 0;
  double                           r_p = 0.07;
  double                           r_q = 0.07;
  E2Mode                           e2_mode = E2Mode::corrected;
  std::vector<KernelBank>          layer_kernels; // L banks of width M
  std::vector<std::vector<double>> layer_alphas;  // L x M
  std::vector<double>              layer_betas;   // L

  void        validate() const;
  ModelParams layer_params(std::size_t layer) const;

  bool operator==(ParameterBundle const &other) const = default;
};

// Kernels alternate dx, dy in every layer; alpha = 1.5 / M, beta = 0.07,
// r_p = r_q = 0.07.
ParameterBundle init_default(std::size_t M, std::size_t L, Index R);

// L copies of one (bank, params) pair. Running it is the solver truncated at L.
ParameterBundle constant_bundle(KernelBank const &bank, ModelParams const &params, std::size_t L);

struct LayerSnapshot
{
  Grid   u;
  Grid   v;
  double primal_p = 0.0; // max_m ||K_m u - p_m||_2
  double primal_q = 0.0; // ||v - q||_2
};

struct LayerTrace
{
  std::vector<LayerSnapshot> layers;
};

struct ForwardResult
{
  Grid                      u;
  Grid                      v;
  SolverState               state;
  std::optional<LayerTrace> trace;
};

ForwardResult idnet_forward(Grid const &f, ParameterBundle const &bundle, bool trace = false);

void            save_bundle(ParameterBundle const &bundle, std::ostream &sink);
void            save_bundle(ParameterBundle const &bundle, std::string const &path);
ParameterBundle load_bundle(std::istream &source);
ParameterBundle load_bundle_file(std::string const &path);

// Addresses one scalar inside a bundle.
struct BundleScalar
{
  enum class Kind
  {
    alpha,
    beta,
    r_p,
    r_q,
    kernel_tap
  };
  Kind        kind = Kind::alpha;
  std::size_t layer = 0;
  std::size_t m = 0;
  Index       row = 0;
  Index       col = 0;
};

double &bundle_scalar(ParameterBundle &bundle, BundleScalar const &which);

// Central-difference derivative of functional(idnet_forward(f, bundle)) with
// respect to one bundle scalar. Debugging aid for exported bundles.
double fd_sensitivity(Grid const &f, ParameterBundle const &bundle, BundleScalar const &which,
                      std::function<double(Grid const &u, Grid const &v)> const &functional, double step = 1e-6);

} // namespace idnet

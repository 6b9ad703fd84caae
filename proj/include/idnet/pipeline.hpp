#pragma once

#include "admm.hpp"
#include "unroll.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace idnet {

inline constexpr double      kDefaultLogEps = 1e-3;
inline constexpr char const *kManifestVersion = "idnet-manifest/1";

// log(max(x, eps)) per pixel, per channel.
GridStack log_transform(GridStack const &channels, double eps = kDefaultLogEps);
GridStack exp_transform(GridStack const &channels);

// Which input channels go through the shared decomposition (F) and which are
// carried through untouched (F~).
struct ChannelPlan
{
  std::vector<std::size_t> decompose_channels;
  std::vector<std::size_t> passthrough_channels;
  bool                     log_domain = false;
  double                   log_eps = kDefaultLogEps;

  void validate(std::size_t channel_count) const;
};

struct RunConfig
{
  enum class Mode
  {
    admm,
    unroll
  };

  Mode                           mode = Mode::admm;
  std::optional<ParameterBundle> bundle;                   // unroll
  std::optional<KernelBank>      bank;                     // admm
  std::optional<ModelParams>     params;                   // admm
  StoppingRule                   stop;                     // admm
  bool                           trace = false;
  bool                           parallel = true;
  std::optional<std::string>     output_dir;               // CLI only
  std::optional<std::string>     trace_csv;                // CLI only

  void validate() const;
};

struct ChannelRun
{
  std::optional<DecompositionResult> solve;   // admm mode
  std::optional<LayerTrace>          layers;  // unroll mode with trace
};

struct MultichannelResult
{
  GridStack               U;
  GridStack               V;
  GridStack               stacked; // U..., V..., passthrough...
  std::vector<ChannelRun> runs;    // one per decompose channel
};

// Decomposes one single-channel image according to config (no log wrapping).
std::pair<Grid, Grid> decompose_channel(Grid const &f, RunConfig const &config, ChannelRun *run = nullptr);

MultichannelResult decompose_multichannel(GridStack const &F, ChannelPlan const &plan, RunConfig const &config);

// Directory of per-channel PFM files plus manifest.json:
//   {"version": "idnet-manifest/1", "height": H, "width": W,
//    "channels": [{"name": ..., "file": ...}, ...]}
struct NamedChannel
{
  std::string name;
  Grid        grid;
};

void                      write_manifest_dir(std::string const &dir, std::vector<NamedChannel> const &channels);
std::vector<NamedChannel> read_manifest(std::string const &manifest_path);

// Trace CSV: header "iteration,objective,primal_p,primal_q,dual", 12 significant digits.
void write_trace_csv(std::ostream &out, DecompositionResult const &result);
// Layer trace CSV: header "layer,primal_p,primal_q".
void write_layer_trace_csv(std::ostream &out, LayerTrace const &trace);

std::string format_number(double x, int significant = 12);

} // namespace idnet

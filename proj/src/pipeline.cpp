#include "idnet/pipeline.hpp"

#include "idnet/image_io.hpp"

#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <ostream>
#include <set>

namespace idnet {

GridStack log_transform(GridStack const &channels, double eps)
{
  if (!(eps > 0.0)) { throw ArgumentError("log_transform: eps must be > 0"); }
  GridStack out;
  out.reserve(channels.size());
  for (auto const &c : channels) { out.push_back(c.max(eps).log()); }
  return out;
}

GridStack exp_transform(GridStack const &channels)
{
  GridStack out;
  out.reserve(channels.size());
  for (auto const &c : channels) { out.push_back(c.exp()); }
  return out;
}

void ChannelPlan::validate(std::size_t channel_count) const
{
  if (decompose_channels.empty()) { throw ArgumentError("channel plan: no channels to decompose"); }
  std::set<std::size_t> seen;
  for (auto const *list : {&decompose_channels, &passthrough_channels}) {
    for (std::size_t k : *list) {
      if (k >= channel_count) {
        throw ArgumentError("channel plan: index " + std::to_string(k) + " out of range for " +
                            std::to_string(channel_count) + " channels");
      }
      if (!seen.insert(k).second) {
        throw ArgumentError("channel plan: channel " + std::to_string(k) + " listed twice");
      }
    }
  }
  if (log_domain && !(log_eps > 0.0)) { throw ArgumentError("channel plan: log eps must be > 0"); }
}

void RunConfig::validate() const
{
  if (mode == Mode::unroll) {
    if (!bundle || bank || params) { throw ArgumentError("run config: unroll mode needs a bundle and no model params"); }
    bundle->validate();
  } else {
    if (bundle || !bank || !params) { throw ArgumentError("run config: admm mode needs a kernel bank and model params"); }
    params->validate(bank->width());
  }
}

std::pair<Grid, Grid> decompose_channel(Grid const &f, RunConfig const &config, ChannelRun *run)
{
  if (config.mode == RunConfig::Mode::unroll) {
    auto result = idnet_forward(f, *config.bundle, config.trace);
    if (run) { run->layers = std::move(result.trace); }
    return {std::move(result.u), std::move(result.v)};
  }
  auto result = admm_solve(f, *config.bank, *config.params, config.stop);
  std::pair<Grid, Grid> out{result.u, result.v};
  if (run) { run->solve = std::move(result); }
  return out;
}

namespace {

// Re-throws err with the channel index prefixed, keeping its category.
[[noreturn]] void rethrow_for_channel(std::exception_ptr err, std::size_t channel)
{
  std::string const prefix = "channel " + std::to_string(channel) + ": ";
  try {
    std::rethrow_exception(err);
  } catch (DivergenceError const &e) {
    throw DivergenceError(e.iteration(), prefix + e.what());
  } catch (NumericalError const &e) {
    throw NumericalError(prefix + e.what());
  } catch (ShapeError const &e) {
    throw ShapeError(prefix + e.what());
  } catch (ArgumentError const &e) {
    throw ArgumentError(prefix + e.what());
  }
}

} // namespace

MultichannelResult decompose_multichannel(GridStack const &F, ChannelPlan const &plan, RunConfig const &config)
{
  validate_stack(F, "decompose_multichannel");
  plan.validate(F.size());
  config.validate();

  std::size_t const K = plan.decompose_channels.size();
  GridStack         inputs;
  for (std::size_t k : plan.decompose_channels) { inputs.push_back(F[k]); }
  if (plan.log_domain) { inputs = log_transform(inputs, plan.log_eps); }

  MultichannelResult result;
  result.U.resize(K);
  result.V.resize(K);
  result.runs.resize(K);
  auto work = [&](std::size_t k) {
    std::tie(result.U[k], result.V[k]) = decompose_channel(inputs[k], config, &result.runs[k]);
  };

  std::vector<std::exception_ptr> errors(K);
  if (config.parallel && K > 1) {
    std::vector<std::future<void>> jobs;
    for (std::size_t k = 0; k < K; k++) { jobs.push_back(std::async(std::launch::async, work, k)); }
    for (std::size_t k = 0; k < K; k++) {
      try {
        jobs[k].get();
      } catch (...) {
        errors[k] = std::current_exception();
      }
    }
  } else {
    for (std::size_t k = 0; k < K; k++) {
      try {
        work(k);
      } catch (...) {
        errors[k] = std::current_exception();
        break;
      }
    }
  }
  for (std::size_t k = 0; k < K; k++) {
    if (errors[k]) { rethrow_for_channel(errors[k], plan.decompose_channels[k]); }
  }

  if (plan.log_domain) {
    result.U = exp_transform(result.U);
    result.V = exp_transform(result.V);
  }
  result.stacked = result.U;
  result.stacked.insert(result.stacked.end(), result.V.begin(), result.V.end());
  for (std::size_t k : plan.passthrough_channels) { result.stacked.push_back(F[k]); }
  return result;
}

void write_manifest_dir(std::string const &dir, std::vector<NamedChannel> const &channels)
{
  namespace fs = std::filesystem;
  if (channels.empty()) { throw ArgumentError("write_manifest_dir: no channels"); }
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) { throw IoError("cannot create directory '" + dir + "': " + ec.message()); }

  nlohmann::ordered_json manifest;
  manifest["version"] = kManifestVersion;
  manifest["height"] = channels.front().grid.rows();
  manifest["width"] = channels.front().grid.cols();
  manifest["channels"] = nlohmann::ordered_json::array();
  for (auto const &c : channels) {
    require_same_shape(c.grid, channels.front().grid, "write_manifest_dir");
    std::string const file = c.name + ".pfm";
    write_pfm((fs::path(dir) / file).string(), c.grid);
    manifest["channels"].push_back({{"name", c.name}, {"file", file}});
  }
  std::ofstream out(fs::path(dir) / "manifest.json");
  if (!out) { throw IoError("cannot write manifest in '" + dir + "'"); }
  out << manifest.dump(2) << "\n";
}

std::vector<NamedChannel> read_manifest(std::string const &manifest_path)
{
  namespace fs = std::filesystem;
  using json = nlohmann::json;
  std::ifstream in(manifest_path);
  if (!in) { throw IoError("cannot open manifest '" + manifest_path + "'"); }
  json doc;
  try {
    doc = json::parse(in);
  } catch (json::parse_error const &e) {
    throw ParseError("", std::string("manifest is not valid JSON: ") + e.what());
  }
  if (!doc.is_object() || doc.value("version", "") != kManifestVersion) {
    throw ParseError("/version", std::string("expected \"") + kManifestVersion + "\"");
  }
  if (!doc.contains("channels") || !doc["channels"].is_array() || doc["channels"].empty()) {
    throw ParseError("/channels", "expected a nonempty array");
  }
  fs::path const            base = fs::path(manifest_path).parent_path();
  std::vector<NamedChannel> out;
  for (std::size_t k = 0; k < doc["channels"].size(); k++) {
    auto const       &entry = doc["channels"][k];
    std::string const path = "/channels/" + std::to_string(k);
    if (!entry.is_object() || !entry.contains("file") || !entry["file"].is_string()) {
      throw ParseError(path + "/file", "missing file name");
    }
    GridStack grids = read_pfm((base / entry["file"].get<std::string>()).string());
    if (grids.size() != 1) { throw ParseError(path, "manifest channels must be single-channel PFM"); }
    out.push_back({entry.value("name", "channel" + std::to_string(k)), std::move(grids.front())});
  }
  for (auto const &c : out) {
    if (c.grid.rows() != out.front().grid.rows() || c.grid.cols() != out.front().grid.cols()) {
      throw ValidationError("channels", "channel dimensions differ");
    }
  }
  if (doc.contains("height") && doc.contains("width") &&
      (doc["height"] != out.front().grid.rows() || doc["width"] != out.front().grid.cols())) {
    throw ValidationError("height", "manifest dimensions disagree with channel files");
  }
  return out;
}

std::string format_number(double x, int significant)
{
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.*g", significant, x);
  return buf;
}

void write_trace_csv(std::ostream &out, DecompositionResult const &result)
{
  std::size_t const n = result.objective_trace.size();
  if (result.primal_residual_p.size() != n || result.primal_residual_q.size() != n || result.dual_residual.size() != n) {
    throw ArgumentError("write_trace_csv: trace lengths differ");
  }
  out << "iteration,objective,primal_p,primal_q,dual\n";
  for (std::size_t i = 0; i < n; i++) {
    out << (i + 1) << ',' << format_number(result.objective_trace[i]) << ','
        << format_number(result.primal_residual_p[i]) << ',' << format_number(result.primal_residual_q[i]) << ','
        << format_number(result.dual_residual[i]) << '\n';
  }
}

void write_layer_trace_csv(std::ostream &out, LayerTrace const &trace)
{
  out << "layer,primal_p,primal_q\n";
  for (std::size_t l = 0; l < trace.layers.size(); l++) {
    out << (l + 1) << ',' << format_number(trace.layers[l].primal_p) << ','
        << format_number(trace.layers[l].primal_q) << '\n';
  }
}

} // namespace idnet

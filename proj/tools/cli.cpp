#include "cli.hpp"

#include "idnet/image_io.hpp"
#include "idnet/metrics.hpp"
#include "idnet/pipeline.hpp"
#include "idnet/selftest.hpp"
#include "idnet/synth.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <ostream>
#include <regex>

namespace idnet::cli {

namespace {

namespace fs = std::filesystem;

struct SizeSpec
{
  Index height = 16;
  Index width = 16;
};

SizeSpec parse_size(std::string const &text)
{
  static std::regex const pattern(R"((\d+)[xX](\d+))");
  std::smatch             m;
  if (!std::regex_match(text, m, pattern)) { throw ArgumentError("--size expects HxW, got '" + text + "'"); }
  SizeSpec s{std::stol(m[1]), std::stol(m[2])};
  if (s.height < 1 || s.width < 1) { throw ArgumentError("--size must be positive"); }
  return s;
}

KernelBank parse_kernels(std::string const &text)
{
  static std::regex const pattern(R"(diff:(\d+),(\d+))");
  std::smatch             m;
  if (!std::regex_match(text, m, pattern)) { throw ArgumentError("--kernels expects diff:M,R, got '" + text + "'"); }
  return make_diff_bank(std::stoul(m[1]), std::stol(m[2]));
}

GridStack load_inputs(std::vector<std::string> const &paths)
{
  GridStack channels;
  for (auto const &path : paths) {
    GridStack part;
    if (fs::is_directory(path)) {
      for (auto &c : read_manifest((fs::path(path) / "manifest.json").string())) { part.push_back(std::move(c.grid)); }
    } else if (fs::path(path).extension() == ".json") {
      for (auto &c : read_manifest(path)) { part.push_back(std::move(c.grid)); }
    } else {
      part = read_image(path);
    }
    channels.insert(channels.end(), part.begin(), part.end());
  }
  validate_stack(channels, "inputs");
  return channels;
}

Grid load_single(std::string const &path, char const *what)
{
  GridStack g = load_inputs({path});
  if (g.size() != 1) { throw ArgumentError(std::string(what) + " must be a single-channel image"); }
  return std::move(g.front());
}

std::string with_suffix(std::string const &path, std::size_t k)
{
  fs::path p(path);
  return (p.parent_path() / (p.stem().string() + "_c" + std::to_string(k) + p.extension().string())).string();
}

// Shared flags of `decompose` and `unroll`.
struct ChannelOptions
{
  std::vector<std::string> inputs;
  std::vector<std::size_t> channels;
  std::vector<std::size_t> passthrough;
  bool                     log_domain = false;
  double                   eps = kDefaultLogEps;
  std::string              out_u;
  std::string              out_v;
  std::string              out_dir;
  std::string              trace_csv;

  void attach(CLI::App *cmd)
  {
    cmd->add_option("--input,-i", inputs, "Input image (PFM/PGM/PPM/PNG) or manifest; repeatable")->required();
    cmd->add_option("--channels", channels, "Channel indices to decompose (default: all)")->delimiter(',');
    cmd->add_option("--passthrough", passthrough, "Channel indices stacked unchanged")->delimiter(',');
    cmd->add_flag("--log-domain", log_domain, "Decompose log(F) and exponentiate the layers");
    cmd->add_option("--eps", eps, "Lower clamp before the logarithm")->capture_default_str();
    cmd->add_option("--out-u", out_u, "PFM output for u (single decomposed channel)");
    cmd->add_option("--out-v", out_v, "PFM output for v (single decomposed channel)");
    cmd->add_option("--out-dir", out_dir, "Directory for the stacked (U, V, passthrough) layers + manifest");
    cmd->add_option("--trace-csv", trace_csv, "Per-iteration (or per-layer) residual trace");
  }
};

int run_channels(ChannelOptions const &opt, RunConfig const &config, std::ostream &out)
{
  GridStack const F = load_inputs(opt.inputs);
  ChannelPlan     plan;
  plan.decompose_channels = opt.channels;
  if (plan.decompose_channels.empty()) {
    for (std::size_t k = 0; k < F.size(); k++) {
      if (std::find(opt.passthrough.begin(), opt.passthrough.end(), k) == opt.passthrough.end()) {
        plan.decompose_channels.push_back(k);
      }
    }
  }
  plan.passthrough_channels = opt.passthrough;
  plan.log_domain = opt.log_domain;
  plan.log_eps = opt.eps;
  plan.validate(F.size());

  bool const single = plan.decompose_channels.size() == 1;
  if ((!opt.out_u.empty() || !opt.out_v.empty()) && !single) {
    throw ArgumentError("--out-u/--out-v need exactly one decomposed channel; use --out-dir");
  }
  if (opt.out_u.empty() && opt.out_v.empty() && opt.out_dir.empty()) {
    throw ArgumentError("no output requested (--out-u, --out-v or --out-dir)");
  }

  RunConfig cfg = config;
  cfg.trace = !opt.trace_csv.empty();
  MultichannelResult const result = decompose_multichannel(F, plan, cfg);

  if (!opt.out_u.empty()) { write_pfm(opt.out_u, result.U.front()); }
  if (!opt.out_v.empty()) { write_pfm(opt.out_v, result.V.front()); }
  if (!opt.out_dir.empty()) {
    std::vector<NamedChannel> named;
    for (std::size_t k = 0; k < result.U.size(); k++) { named.push_back({"U" + std::to_string(k), result.U[k]}); }
    for (std::size_t k = 0; k < result.V.size(); k++) { named.push_back({"V" + std::to_string(k), result.V[k]}); }
    for (std::size_t k : plan.passthrough_channels) { named.push_back({"passthrough" + std::to_string(k), F[k]}); }
    write_manifest_dir(opt.out_dir, named);
  }
  if (!opt.trace_csv.empty()) {
    for (std::size_t k = 0; k < result.runs.size(); k++) {
      std::string const path = single ? opt.trace_csv : with_suffix(opt.trace_csv, plan.decompose_channels[k]);
      std::ofstream     csv(path);
      if (!csv) { throw IoError("cannot write '" + path + "'"); }
      if (result.runs[k].solve) { write_trace_csv(csv, *result.runs[k].solve); }
      if (result.runs[k].layers) { write_layer_trace_csv(csv, *result.runs[k].layers); }
    }
  }
  out << "decomposed " << plan.decompose_channels.size() << " channel(s), " << result.stacked.size()
      << " stacked\n";
  return kOk;
}

std::string csv_row(std::vector<double> const &values)
{
  std::string row;
  for (std::size_t i = 0; i < values.size(); i++) { row += (i ? "," : "") + format_number(values[i]); }
  return row;
}

} // namespace

int run(std::vector<std::string> const &args, std::ostream &out, std::ostream &err)
{
  CLI::App app{"Sparse-feature image decomposition (scaled ADMM and its unrolled network)", "idnet"};
  app.require_subcommand(1);

  // synth
  auto        *synth = app.add_subcommand("synth", "Write a squares + impulses scene");
  std::uint64_t seed = 7;
  std::string  size_text = "16x16";
  int          squares = 3;
  int          impulses = 8;
  double       amplitude = 0.6;
  std::string  synth_dir;
  synth->add_option("--seed", seed)->capture_default_str();
  synth->add_option("--size", size_text, "HxW")->capture_default_str();
  synth->add_option("--squares", squares)->capture_default_str();
  synth->add_option("--impulses", impulses)->capture_default_str();
  synth->add_option("--amplitude", amplitude)->capture_default_str();
  synth->add_option("--out-dir", synth_dir, "Directory for image/background/impulse_map/impulse_mask")->required();

  // decompose
  auto               *decompose = app.add_subcommand("decompose", "Run the scaled-ADMM solver");
  ChannelOptions      dec_opt;
  std::vector<double> alphas;
  double              beta = 0.07;
  double              rp = 0.07;
  double              rq = 0.07;
  long                iters = 100;
  double              tol = -1.0;
  std::string         kernels = "diff:2,1";
  bool                paper_e2 = false;
  dec_opt.attach(decompose);
  decompose->add_option("--alpha", alphas, "Weight per kernel (one value broadcasts; default 1.5/M)");
  decompose->add_option("--beta", beta)->capture_default_str();
  decompose->add_option("--rp", rp)->capture_default_str();
  decompose->add_option("--rq", rq)->capture_default_str();
  decompose->add_option("--iters", iters)->capture_default_str();
  decompose->add_option("--tol", tol, "Stop when max primal residual <= tol");
  decompose->add_option("--kernels", kernels, "Kernel bank, diff:M,R")->capture_default_str();
  decompose->add_flag("--paper-e2", paper_e2, "Use E2 = r_q I in the linear solve");

  // unroll
  auto          *unroll = app.add_subcommand("unroll", "Run the unrolled network with a parameter bundle");
  ChannelOptions un_opt;
  std::string    bundle_path;
  un_opt.attach(unroll);
  unroll->add_option("--bundle", bundle_path, "Bundle document (idnet-bundle/1)")->required();

  // init-bundle
  auto       *init = app.add_subcommand("init-bundle", "Write the default-initialized bundle");
  std::size_t M = 4;
  std::size_t L = 16;
  long        R = 2;
  std::string init_out;
  init->add_option("--M,-M", M, "Kernels per layer (even)")->capture_default_str();
  init->add_option("--L,-L", L, "Layers")->capture_default_str();
  init->add_option("--R,-R", R, "Kernel radius")->capture_default_str();
  init->add_option("--out", init_out)->required();

  // metrics
  auto       *metrics = app.add_subcommand("metrics", "AUC, ACC, MCC and cross-entropy as a CSV row");
  std::string scores_path;
  std::string truth_path;
  std::string region_path;
  double      threshold = 0.5;
  metrics->add_option("--scores", scores_path)->required();
  metrics->add_option("--truth", truth_path)->required();
  metrics->add_option("--region", region_path, "Binary evaluation mask (e.g. FOV)");
  metrics->add_option("--threshold", threshold, "Binarization threshold for ACC/MCC")->capture_default_str();

  auto *selftest = app.add_subcommand("selftest", "Run the built-in oracle checks");

  std::vector<char const *> argv{"idnet"};
  for (auto const &a : args) { argv.push_back(a.c_str()); }
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (CLI::CallForHelp const &e) {
    return app.exit(e, out, err);
  } catch (CLI::CallForAllHelp const &e) {
    return app.exit(e, out, err);
  } catch (CLI::ParseError const &e) {
    err << "error: " << e.what() << "\n";
    return kArgument;
  }

  try {
    if (synth->parsed()) {
      SizeSpec const size = parse_size(size_text);
      Scene const    scene = make_squares_scene(seed, size.height, size.width, squares, impulses, amplitude);
      write_manifest_dir(synth_dir, {{"image", scene.image},
                                     {"background", scene.background},
                                     {"impulse_map", scene.impulse_map},
                                     {"impulse_mask", scene.impulse_mask}});
      out << "wrote scene to " << synth_dir << "\n";
      return kOk;
    }
    if (decompose->parsed()) {
      RunConfig cfg;
      cfg.mode = RunConfig::Mode::admm;
      cfg.bank = parse_kernels(kernels);
      std::size_t const width = cfg.bank->width();
      ModelParams       params;
      if (alphas.empty()) {
        params.alphas.assign(width, 1.5 / static_cast<double>(width));
      } else if (alphas.size() == 1) {
        params.alphas.assign(width, alphas.front());
      } else {
        params.alphas = alphas;
      }
      params.beta = beta;
      params.r_p = rp;
      params.r_q = rq;
      params.e2_mode = paper_e2 ? E2Mode::paper : E2Mode::corrected;
      cfg.params = params;
      cfg.stop.max_iterations = iters;
      if (decompose->count("--tol") > 0) { cfg.stop.tolerance = tol; }
      return run_channels(dec_opt, cfg, out);
    }
    if (unroll->parsed()) {
      RunConfig cfg;
      cfg.mode = RunConfig::Mode::unroll;
      cfg.bundle = load_bundle_file(bundle_path);
      return run_channels(un_opt, cfg, out);
    }
    if (init->parsed()) {
      save_bundle(init_default(M, L, R), init_out);
      out << "wrote bundle to " << init_out << "\n";
      return kOk;
    }
    if (metrics->parsed()) {
      ScoreMap scores{load_single(scores_path, "--scores"), std::nullopt};
      Grid const truth = load_single(truth_path, "--truth");
      if (!region_path.empty()) { scores.region = load_single(region_path, "--region"); }
      Grid const            pred = binarize(scores.values, threshold);
      Grid const           *region = scores.region ? &*scores.region : nullptr;
      ConfusionCounts const counts = confusion(pred, truth, region);
      out << "auc,acc,mcc,cross_entropy\n";
      out << csv_row({auc(scores, truth), acc(counts), mcc(counts), cross_entropy(scores, truth)}) << "\n";
      return kOk;
    }
    if (selftest->parsed()) {
      bool ok = true;
      for (auto const &check : run_selftest()) {
        out << (check.passed ? "PASS " : "FAIL ") << check.name << " worst=" << format_number(check.worst, 3)
            << " limit=" << format_number(check.limit, 3) << "\n";
        ok = ok && check.passed;
      }
      if (!ok) {
        err << "error: selftest failed\n";
        return kSelftest;
      }
      return kOk;
    }
  } catch (ParseError const &e) {
    err << "error: parse: " << e.what() << "\n";
    return kIo;
  } catch (IoError const &e) {
    err << "error: io: " << e.what() << "\n";
    return kIo;
  } catch (NumericalError const &e) {
    err << "error: numerical: " << e.what() << "\n";
    return kNumerical;
  } catch (ValidationError const &e) {
    err << "error: validation: " << e.what() << "\n";
    return kArgument;
  } catch (Error const &e) {
    err << "error: " << e.what() << "\n";
    return kArgument;
  }
  return kArgument;
}

} // namespace idnet::cli

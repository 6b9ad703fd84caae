#include "idnet/unroll.hpp"

#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <sstream>

namespace idnet {

void ParameterBundle::validate() const
{
  if (M == 0) { throw ValidationError("M", "must be >= 1"); }
  if (L == 0) { throw ValidationError("L", "must be >= 1"); }
  if (R < 0) { throw ValidationError("R", "must be >= 0"); }
  if (!(r_p > 0.0) || !std::isfinite(r_p)) { throw ValidationError("r_p", "must be finite and > 0"); }
  if (!(r_q > 0.0) || !std::isfinite(r_q)) { throw ValidationError("r_q", "must be finite and > 0"); }
  if (layer_kernels.size() != L) {
    throw ValidationError("layer_kernels", "expected " + std::to_string(L) + " layers, got " +
                                             std::to_string(layer_kernels.size()));
  }
  for (std::size_t l = 0; l < L; l++) {
    if (layer_kernels[l].width() != M) {
      throw ValidationError("layer_kernels/" + std::to_string(l), "expected " + std::to_string(M) + " kernels");
    }
    for (auto const &k : layer_kernels[l]) {
      if (k.radius() != R) {
        throw ValidationError("layer_kernels/" + std::to_string(l), "kernel radius differs from R");
      }
    }
  }
  if (layer_alphas.size() != L) {
    throw ValidationError("layer_alphas", "expected " + std::to_string(L) + " rows, got " +
                                            std::to_string(layer_alphas.size()));
  }
  for (std::size_t l = 0; l < L; l++) {
    if (layer_alphas[l].size() != M) {
      throw ValidationError("layer_alphas/" + std::to_string(l), "expected " + std::to_string(M) + " values");
    }
    for (double a : layer_alphas[l]) {
      if (!(a >= 0.0) || !std::isfinite(a)) {
        throw ValidationError("layer_alphas/" + std::to_string(l), "values must be finite and >= 0");
      }
    }
  }
  if (layer_betas.size() != L) {
    throw ValidationError("layer_betas", "expected " + std::to_string(L) + " values, got " +
                                           std::to_string(layer_betas.size()));
  }
  for (double b : layer_betas) {
    if (!(b >= 0.0) || !std::isfinite(b)) { throw ValidationError("layer_betas", "values must be finite and >= 0"); }
  }
}

ModelParams ParameterBundle::layer_params(std::size_t layer) const
{
  return ModelParams{layer_alphas.at(layer), layer_betas.at(layer), r_p, r_q, e2_mode};
}

ParameterBundle init_default(std::size_t M, std::size_t L, Index R)
{
  if (L < 1) { throw ArgumentError("init_default: L must be >= 1"); }
  KernelBank const bank = make_diff_bank(M, R);
  ParameterBundle  b;
  b.M = M;
  b.L = L;
  b.R = R;
  b.r_p = 0.07;
  b.r_q = 0.07;
  b.layer_kernels.assign(L, bank);
  b.layer_alphas.assign(L, std::vector<double>(M, 1.5 / static_cast<double>(M)));
  b.layer_betas.assign(L, 0.07);
  return b;
}

ParameterBundle constant_bundle(KernelBank const &bank, ModelParams const &params, std::size_t L)
{
  params.validate(bank.width());
  if (L < 1) { throw ArgumentError("constant_bundle: L must be >= 1"); }
  ParameterBundle b;
  b.M = bank.width();
  b.L = L;
  b.R = bank.radius();
  b.r_p = params.r_p;
  b.r_q = params.r_q;
  b.e2_mode = params.e2_mode;
  b.layer_kernels.assign(L, bank);
  b.layer_alphas.assign(L, params.alphas);
  b.layer_betas.assign(L, params.beta);
  return b;
}

ForwardResult idnet_forward(Grid const &f, ParameterBundle const &bundle, bool trace)
{
  bundle.validate();
  if (!all_finite(f)) { throw ArgumentError("idnet_forward: input image has non-finite values"); }
  ForwardResult result;
  if (trace) { result.trace.emplace(); }

  SolverState                  state = SolverState::zeros(bundle.M, f.rows(), f.cols());
  std::optional<LayerOperator> op;
  for (std::size_t l = 0; l < bundle.L; l++) {
    KernelBank const &bank = bundle.layer_kernels[l];
    if (!op || !(op->bank() == bank)) {
      op.emplace(bank, bundle.r_p, bundle.r_q, bundle.e2_mode, f.rows(), f.cols());
    }
    state = admm_step(f, state, *op, bundle.layer_params(l));
    if (trace) {
      LayerSnapshot snap;
      snap.u = state.u;
      snap.v = state.v;
      for (std::size_t m = 0; m < bundle.M; m++) {
        snap.primal_p = std::max(snap.primal_p, norm2(conv_periodic(state.u, bank[m]) - state.p[m]));
      }
      snap.primal_q = norm2(state.v - state.q);
      result.trace->layers.push_back(std::move(snap));
    }
  }
  result.u = state.u;
  result.v = state.v;
  result.state = std::move(state);
  return result;
}

namespace {

std::string num(double x)
{
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

using json = nlohmann::json;

json const &field(json const &doc, char const *key, std::string const &path)
{
  auto it = doc.find(key);
  if (it == doc.end()) { throw ParseError(path + "/" + key, "missing field"); }
  return *it;
}

double as_number(json const &j, std::string const &path)
{
  if (!j.is_number()) { throw ParseError(path, "expected a number"); }
  return j.get<double>();
}

long as_integer(json const &j, std::string const &path)
{
  if (!j.is_number_integer()) { throw ParseError(path, "expected an integer"); }
  return j.get<long>();
}

json const &as_array(json const &j, std::string const &path)
{
  if (!j.is_array()) { throw ParseError(path, "expected an array"); }
  return j;
}

} // namespace

void save_bundle(ParameterBundle const &bundle, std::ostream &sink)
{
  bundle.validate();
  std::ostringstream out;
  out << "{\n";
  out << "  \"version\": \"" << kBundleVersion << "\",\n";
  out << "  \"M\": " << bundle.M << ",\n";
  out << "  \"L\": " << bundle.L << ",\n";
  out << "  \"R\": " << bundle.R << ",\n";
  out << "  \"r_p\": " << num(bundle.r_p) << ",\n";
  out << "  \"r_q\": " << num(bundle.r_q) << ",\n";
  out << "  \"e2_mode\": \"" << to_string(bundle.e2_mode) << "\",\n";
  out << "  \"layer_alphas\": [";
  for (std::size_t l = 0; l < bundle.L; l++) {
    out << (l ? ",\n    [" : "\n    [");
    for (std::size_t m = 0; m < bundle.M; m++) { out << (m ? ", " : "") << num(bundle.layer_alphas[l][m]); }
    out << "]";
  }
  out << "\n  ],\n";
  out << "  \"layer_betas\": [";
  for (std::size_t l = 0; l < bundle.L; l++) { out << (l ? ", " : "") << num(bundle.layer_betas[l]); }
  out << "],\n";
  out << "  \"layer_kernels\": [";
  for (std::size_t l = 0; l < bundle.L; l++) {
    out << (l ? ",\n    [" : "\n    [");
    for (std::size_t m = 0; m < bundle.M; m++) {
      out << (m ? ",\n      [" : "\n      [");
      auto const &taps = bundle.layer_kernels[l][m].taps();
      for (Index i = 0; i < taps.rows(); i++) {
        out << (i ? ", [" : "[");
        for (Index j = 0; j < taps.cols(); j++) { out << (j ? ", " : "") << num(taps(i, j)); }
        out << "]";
      }
      out << "]";
    }
    out << "\n    ]";
  }
  out << "\n  ]\n}\n";
  sink << out.str();
  if (!sink) { throw IoError("save_bundle: write failed"); }
}

void save_bundle(ParameterBundle const &bundle, std::string const &path)
{
  std::ofstream file(path);
  if (!file) { throw IoError("cannot open '" + path + "' for writing"); }
  save_bundle(bundle, file);
}

ParameterBundle load_bundle(std::istream &source)
{
  json doc;
  try {
    doc = json::parse(source);
  } catch (json::parse_error const &e) {
    throw ParseError("", std::string("bundle is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) { throw ParseError("", "bundle must be a JSON object"); }

  auto const &version = field(doc, "version", "");
  if (!version.is_string() || version.get<std::string>() != kBundleVersion) {
    throw ParseError("/version", std::string("expected \"") + kBundleVersion + "\"");
  }

  ParameterBundle b;
  long const      M = as_integer(field(doc, "M", ""), "/M");
  long const      L = as_integer(field(doc, "L", ""), "/L");
  long const      R = as_integer(field(doc, "R", ""), "/R");
  if (M < 1) { throw ValidationError("M", "must be >= 1"); }
  if (L < 1) { throw ValidationError("L", "must be >= 1"); }
  if (R < 0) { throw ValidationError("R", "must be >= 0"); }
  b.M = static_cast<std::size_t>(M);
  b.L = static_cast<std::size_t>(L);
  b.R = R;
  b.r_p = as_number(field(doc, "r_p", ""), "/r_p");
  b.r_q = as_number(field(doc, "r_q", ""), "/r_q");
  if (auto it = doc.find("e2_mode"); it != doc.end()) {
    if (!it->is_string()) { throw ParseError("/e2_mode", "expected a string"); }
    try {
      b.e2_mode = e2_mode_from_string(it->get<std::string>());
    } catch (ArgumentError const &e) {
      throw ParseError("/e2_mode", e.what());
    }
  }

  auto const &alphas = as_array(field(doc, "layer_alphas", ""), "/layer_alphas");
  for (std::size_t l = 0; l < alphas.size(); l++) {
    std::string const path = "/layer_alphas/" + std::to_string(l);
    std::vector<double> row;
    for (std::size_t m = 0; m < as_array(alphas[l], path).size(); m++) {
      row.push_back(as_number(alphas[l][m], path + "/" + std::to_string(m)));
    }
    b.layer_alphas.push_back(std::move(row));
  }

  auto const &betas = as_array(field(doc, "layer_betas", ""), "/layer_betas");
  for (std::size_t l = 0; l < betas.size(); l++) {
    b.layer_betas.push_back(as_number(betas[l], "/layer_betas/" + std::to_string(l)));
  }

  auto const &kernels = as_array(field(doc, "layer_kernels", ""), "/layer_kernels");
  Index const side = 2 * b.R + 1;
  for (std::size_t l = 0; l < kernels.size(); l++) {
    std::string const   lpath = "/layer_kernels/" + std::to_string(l);
    std::vector<Kernel> bank;
    for (std::size_t m = 0; m < as_array(kernels[l], lpath).size(); m++) {
      std::string const mpath = lpath + "/" + std::to_string(m);
      auto const       &rows = as_array(kernels[l][m], mpath);
      if (static_cast<Index>(rows.size()) != side) {
        throw ValidationError(mpath.substr(1), "expected " + std::to_string(side) + " rows");
      }
      Kernel::Taps taps(side, side);
      for (Index i = 0; i < side; i++) {
        std::string const ipath = mpath + "/" + std::to_string(i);
        auto const       &row = as_array(rows[i], ipath);
        if (static_cast<Index>(row.size()) != side) {
          throw ValidationError(ipath.substr(1), "expected " + std::to_string(side) + " columns");
        }
        for (Index j = 0; j < side; j++) { taps(i, j) = as_number(row[j], ipath + "/" + std::to_string(j)); }
      }
      try {
        bank.emplace_back(b.R, std::move(taps));
      } catch (Error const &e) {
        throw ValidationError(mpath.substr(1), e.what());
      }
    }
    if (bank.empty()) { throw ValidationError(lpath.substr(1), "layer has no kernels"); }
    b.layer_kernels.emplace_back(std::move(bank));
  }

  b.validate();
  return b;
}

ParameterBundle load_bundle_file(std::string const &path)
{
  std::ifstream file(path);
  if (!file) { throw IoError("cannot open bundle '" + path + "'"); }
  return load_bundle(file);
}

double &bundle_scalar(ParameterBundle &bundle, BundleScalar const &which)
{
  switch (which.kind) {
  case BundleScalar::Kind::alpha: return bundle.layer_alphas.at(which.layer).at(which.m);
  case BundleScalar::Kind::beta: return bundle.layer_betas.at(which.layer);
  case BundleScalar::Kind::r_p: return bundle.r_p;
  case BundleScalar::Kind::r_q: return bundle.r_q;
  case BundleScalar::Kind::kernel_tap: {
    auto       &bank = bundle.layer_kernels.at(which.layer);
    Index const R = bank.radius();
    if (which.m >= bank.width() || which.row < 0 || which.row > 2 * R || which.col < 0 || which.col > 2 * R) {
      throw ArgumentError("bundle_scalar: kernel tap out of range");
    }
    return bank.tap(which.m, which.row - R, which.col - R);
  }
  }
  throw ArgumentError("bundle_scalar: unknown kind");
}

double fd_sensitivity(Grid const &f, ParameterBundle const &bundle, BundleScalar const &which,
                      std::function<double(Grid const &, Grid const &)> const &functional, double step)
{
  if (!(step > 0.0)) { throw ArgumentError("fd_sensitivity: step must be > 0"); }
  ParameterBundle plus = bundle;
  ParameterBundle minus = bundle;
  bundle_scalar(plus, which) += step;
  bundle_scalar(minus, which) -= step;
  auto const up = idnet_forward(f, plus);
  auto const down = idnet_forward(f, minus);
  return (functional(up.u, up.v) - functional(down.u, down.v)) / (2.0 * step);
}

} // namespace idnet

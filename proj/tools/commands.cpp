#include "commands.hpp"

#include <openssl/evp.h>

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "rffqrng/rffqrng.hpp"

namespace rffqrng::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr double kDefaultSweepBits = 1e7;
constexpr double kDefaultGenerateBits = 1e6;

std::string num(double v) {
  std::array<char, 32> buf{};
  std::snprintf(buf.data(), buf.size(), "%.17g", v);
  return buf.data();
}

std::string utc_now() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::array<char, 32> buf{};
  std::strftime(buf.data(), buf.size(), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf.data();
}

double parse_number(const std::string& s) {
  std::size_t used = 0;
  double v = 0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw Error(ErrorCode::InvalidInput, "not a number: '" + s + "'");
  }
  if (used != s.size() || !std::isfinite(v)) throw Error(ErrorCode::InvalidInput, "not a number: '" + s + "'");
  return v;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

sts::TestKind test_kind(const std::string& name) {
  static const std::map<std::string, sts::TestKind> kinds = {
      {"frequency", sts::TestKind::Frequency}, {"apen", sts::TestKind::ApproximateEntropy},
      {"approximate-entropy", sts::TestKind::ApproximateEntropy}, {"fft", sts::TestKind::Fft},
      {"universal", sts::TestKind::Universal}, {"runs", sts::TestKind::Runs}};
  const auto it = kinds.find(name);
  if (it == kinds.end()) throw Error(ErrorCode::InvalidInput, "unknown test '" + name + "'");
  return it->second;
}

/// File-name friendly form of a report name: "ApproximateEntropy(m=3)" -> "approximate_entropy_m3".
std::string slug(const std::string& name) {
  std::string s;
  for (std::size_t i = 0; i < name.size(); ++i) {
    const char c = name[i];
    if (std::isupper(static_cast<unsigned char>(c))) {
      if (i > 0 && std::islower(static_cast<unsigned char>(name[i - 1]))) s += '_';
      s += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    } else if (std::isalnum(static_cast<unsigned char>(c))) {
      s += c;
    } else if (c == '(') {
      s += '_';
    }
  }
  return s;
}

std::vector<double> sweep_axis(const std::vector<double>& given, std::vector<double> fallback) {
  return given.empty() ? fallback : given;
}

double single(const std::vector<double>& v, double fallback, const char* what) {
  if (v.empty()) return fallback;
  if (v.size() != 1) throw Error(ErrorCode::InvalidInput, std::string(what) + " takes a single value here");
  return v.front();
}

std::size_t bits_or(const Options& o, double fallback) {
  return o.n_bits > 0 ? o.n_bits : static_cast<std::size_t>(fallback);
}

struct GridPoint {
  double f_bit;
  double f_det;
};

std::vector<GridPoint> sweep_grid(const Options& o) {
  const auto f_bits = sweep_axis(o.f_bit, {10e6, 15e6, 20e6, 25e6});
  const auto f_dets = sweep_axis(o.f_det, {10e6, 20e6, 30e6, 40e6, 50e6, 60e6, 70e6, 80e6});
  std::vector<GridPoint> g;
  for (double fb : f_bits) {
    for (double fd : f_dets) g.push_back({fb, fd});
  }
  if (g.empty()) throw Error(ErrorCode::InvalidInput, "sweep grid is empty");
  return g;
}

/// Each grid point draws its stages from its own block of substreams.
QrngConfig point_config(const Options& o, const GridPoint& p, std::size_t index, std::size_t n_bits) {
  auto cfg = qrng_config(o, p.f_det, p.f_bit, n_bits);
  for (std::size_t s = 0; s < cfg.stages.size(); ++s) cfg.stages[s].stream = index * cfg.stages.size() + s;
  return cfg;
}

json outputs_json(const std::vector<fs::path>& outputs) {
  json arr = json::array();
  for (const auto& p : outputs) {
    arr.push_back({{"path", p.string()}, {"sha256", sha256_file(p)}, {"bytes", fs::file_size(p)}});
  }
  return arr;
}

void write_manifest(const fs::path& path, const Options& o, const std::string& started,
                    const std::vector<fs::path>& outputs) {
  const json m = {{"schema_version", io::kSchemaVersion},
                  {"tool", "rffqrng"},
                  {"version", RFFQRNG_VERSION},
                  {"command", o.command},
                  {"seed", o.seed},
                  {"options", to_json(o)},
                  {"started_utc", started},
                  {"finished_utc", utc_now()},
                  {"outputs", outputs_json(outputs)}};
  io::write_text_atomic(path, m.dump(2) + "\n");
}

fs::path manifest_path_for(const fs::path& output) { return fs::path(output.string() + ".manifest.json"); }

void ensure_parent(const fs::path& p) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
}

json config_json(const QrngConfig& cfg, double phase) {
  json stages = json::array();
  for (const auto& s : cfg.stages) {
    stages.push_back({{"f_det", s.f_det}, {"dead_time", s.dead_time}, {"seed", s.seed}, {"stream", s.stream}});
  }
  return {{"stages", stages},
          {"analog", {{"eta", cfg.analog.eta}, {"t_rise", cfg.analog.t_rise}, {"t_fall", cfg.analog.t_fall}}},
          {"sampler", {{"f_bit", cfg.sampler.f_bit}, {"phase", phase}}},
          {"n_bits", cfg.n_bits},
          {"initial_state", cfg.initial_state}};
}

void emit_json(const Options& o, const json& j, std::ostream& out, const std::string& started) {
  if (o.out.empty()) {
    out << j.dump(2) << "\n";
    return;
  }
  const fs::path path = o.out;
  ensure_parent(path);
  io::write_text_atomic(path, j.dump(2) + "\n");
  write_manifest(manifest_path_for(path), o, started, {path});
}

json analyze_one(const BitStream& bits, const Options& o) {
  const auto b = stats::bias(bits);
  json ac = json::array();
  for (const auto& a : stats::autocorr_profile(bits, o.k_max)) {
    ac.push_back({{"k", a.lag}, {"value", a.value}, {"stderr", a.standard_error()}});
  }
  json ent = json::object();
  for (unsigned L : o.entropy_l) {
    if (bits.size() >= L) ent[std::to_string(L)] = stats::ngram_entropy(bits, L);
  }
  return {{"n_bits", bits.size()},
          {"bias", {{"value", b.value}, {"stderr", b.standard_error()}, {"variance", b.variance}}},
          {"autocorr", ac},
          {"entropy", ent}};
}

int exit_code_for(ErrorCode c) {
  switch (c) {
    case ErrorCode::InvalidConfig:
    case ErrorCode::InvalidInput:
    case ErrorCode::InvalidBlockLength:
    case ErrorCode::BlockTooShort:
    case ErrorCode::NoCompleteBlock:
    case ErrorCode::LagTooLarge:
    case ErrorCode::EmptyInput:
    case ErrorCode::TooFewSamples:
      return kExitUsage;
    default:
      return kExitRuntime;
  }
}

}  // namespace

json to_json(const Options& o) {
  return {{"command", o.command},
          {"f_det", o.f_det},
          {"f_bit", o.f_bit},
          {"dead_time", o.dead_time},
          {"eta", o.eta},
          {"zero_bias_eta", o.zero_bias_eta},
          {"t_rise", o.t_rise},
          {"t_fall", o.t_fall},
          {"stages", o.stages},
          {"n_bits", o.n_bits},
          {"seed", o.seed},
          {"phase", o.phase ? json(*o.phase) : json(nullptr)},
          {"initial_state", o.initial_state},
          {"block_size", o.block_size},
          {"apen_m", o.apen_m},
          {"tests", o.tests},
          {"jobs", o.jobs},
          {"k_max", o.k_max},
          {"entropy_l", o.entropy_l},
          {"out", o.out},
          {"inputs", o.inputs},
          {"export_detections", o.export_detections},
          {"n_events", o.n_events}};
}

Options options_from_json(const json& j) {
  Options o;
  try {
    j.at("command").get_to(o.command);
    j.at("f_det").get_to(o.f_det);
    j.at("f_bit").get_to(o.f_bit);
    j.at("dead_time").get_to(o.dead_time);
    j.at("eta").get_to(o.eta);
    j.at("zero_bias_eta").get_to(o.zero_bias_eta);
    j.at("t_rise").get_to(o.t_rise);
    j.at("t_fall").get_to(o.t_fall);
    j.at("stages").get_to(o.stages);
    j.at("n_bits").get_to(o.n_bits);
    j.at("seed").get_to(o.seed);
    if (!j.at("phase").is_null()) o.phase = j.at("phase").get<double>();
    j.at("initial_state").get_to(o.initial_state);
    j.at("block_size").get_to(o.block_size);
    j.at("apen_m").get_to(o.apen_m);
    j.at("tests").get_to(o.tests);
    j.at("jobs").get_to(o.jobs);
    j.at("k_max").get_to(o.k_max);
    j.at("entropy_l").get_to(o.entropy_l);
    j.at("out").get_to(o.out);
    j.at("inputs").get_to(o.inputs);
    j.at("export_detections").get_to(o.export_detections);
    j.at("n_events").get_to(o.n_events);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::FormatError, std::string("manifest options: ") + e.what());
  }
  return o;
}

std::vector<double> parse_grid(const std::vector<std::string>& items) {
  std::vector<double> out;
  for (const auto& raw : items) {
    const std::string item = trim(raw);
    if (item.empty()) continue;
    const auto c1 = item.find(':');
    if (c1 == std::string::npos) {
      out.push_back(parse_number(item));
      continue;
    }
    const auto c2 = item.find(':', c1 + 1);
    if (c2 == std::string::npos) throw Error(ErrorCode::InvalidInput, "range must be start:stop:step, got " + item);
    const double start = parse_number(item.substr(0, c1));
    const double stop = parse_number(item.substr(c1 + 1, c2 - c1 - 1));
    const double step = parse_number(item.substr(c2 + 1));
    if (!(step > 0)) throw Error(ErrorCode::InvalidInput, "range step must be positive in " + item);
    // index-based so that 10e6:80e6:10e6 hits 80e6 despite rounding
    for (std::size_t i = 0;; ++i) {
      const double v = start + static_cast<double>(i) * step;
      if (v > stop * (1 + 1e-12)) break;
      out.push_back(v);
    }
  }
  return out;
}

std::size_t parse_count(const std::string& s) {
  const double v = parse_number(trim(s));
  if (v < 0 || v != std::floor(v) || v > 9007199254740992.0) {
    throw Error(ErrorCode::InvalidInput, "expected a non-negative integer count, got " + s);
  }
  return static_cast<std::size_t>(v);
}

AnalogTimingModel analog_model(const Options& o) {
  AnalogTimingModel a{o.eta, o.t_rise, o.t_fall};
  if (o.zero_bias_eta) a.eta = analytic::zero_bias_eta(o.t_rise, o.t_fall);
  a.validate();
  return a;
}

QrngConfig qrng_config(const Options& o, double f_det, double f_bit, std::size_t n_bits) {
  SamplerConfig s{f_bit, o.phase};
  auto cfg = QrngConfig::uniform(o.stages, f_det, o.dead_time, o.seed, analog_model(o), s, n_bits);
  cfg.initial_state = o.initial_state;
  cfg.validate();
  return cfg;
}

std::string sha256_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + p.string());
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorCode::IoError, "sha256 init failed");
  }
  std::vector<char> buf(1 << 20);
  while (in) {
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (in.gcount() > 0) EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned len = 0;
  EVP_DigestFinal_ex(ctx.get(), md.data(), &len);
  std::string hex;
  static constexpr char digits[] = "0123456789abcdef";
  for (unsigned i = 0; i < len; ++i) {
    hex += digits[md[i] >> 4];
    hex += digits[md[i] & 15];
  }
  return hex;
}

int cmd_generate(const Options& o, std::ostream& log) {
  const std::string started = utc_now();
  const double f_det = single(o.f_det, 45e6, "--f-det");
  const double f_bit = single(o.f_bit, 20e6, "--f-bit");
  auto cfg = qrng_config(o, f_det, f_bit, bits_or(o, kDefaultGenerateBits));
  const double phase = resolve_phase(cfg);
  cfg.sampler.phase = phase;

  const fs::path out = o.out.empty() ? fs::path("bits.bin") : fs::path(o.out);
  ensure_parent(out);
  const auto bits = simulate_qrng(cfg, o.jobs);
  io::write_bitstream(out, bits, {{"seed", o.seed}, {"config", config_json(cfg, phase)}});
  std::vector<fs::path> outputs = {out, io::sidecar_path(out)};

  if (!o.export_detections.empty()) {
    if (o.n_events == 0) throw Error(ErrorCode::InvalidInput, "--export-detections needs --n-events");
    const fs::path det = o.export_detections;
    ensure_parent(det);
    io::write_detections(det, generate_detections(cfg.stages.front(), o.n_events), cfg.stages.front());
    outputs.push_back(det);
    outputs.push_back(io::sidecar_path(det));
  }
  write_manifest(manifest_path_for(out), o, started, outputs);
  log << "wrote " << bits.size() << " bits to " << out.string() << "\n";
  return kExitOk;
}

int cmd_sweep_bias(const Options& o, std::ostream& log) {
  const std::string started = utc_now();
  const auto grid = sweep_grid(o);
  const std::size_t n = bits_or(o, kDefaultSweepBits);
  for (std::size_t i = 0; i < grid.size(); ++i) point_config(o, grid[i], i, n);   // validate up front

  std::vector<std::string> rows(grid.size());
  parallel_for(grid.size(), o.jobs, [&](std::size_t i) {
    const auto& p = grid[i];
    const auto cfg = point_config(o, p, i, n);
    const auto b = stats::bias(simulate_qrng(cfg));
    const double lambda = p.f_det / p.f_bit;
    const double single_b = analytic::predicted_bias(cfg.analog, p.f_det);
    const auto chain = analytic::xor_chain({single_b, analytic::a1_ideal(lambda)}, cfg.stages.size());
    rows[i] = std::to_string(io::kSchemaVersion) + "," + num(p.f_bit) + "," + num(p.f_det) + "," + num(lambda) + "," +
              std::to_string(n) + "," + num(b.value) + "," + num(b.standard_error()) + "," + num(chain.back().bias);
  });

  std::string csv = "schema_version,f_bit,f_det,lambda,n_bits,bias,stderr,predicted_bias\n";
  for (const auto& r : rows) csv += r + "\n";
  const fs::path out = o.out.empty() ? fs::path("sweep_bias.csv") : fs::path(o.out);
  ensure_parent(out);
  io::write_text_atomic(out, csv);
  write_manifest(manifest_path_for(out), o, started, {out});
  log << "wrote " << grid.size() << " points to " << out.string() << "\n";
  return kExitOk;
}

int cmd_sweep_autocorr(const Options& o, std::ostream& log) {
  const std::string started = utc_now();
  if (o.k_max == 0) throw Error(ErrorCode::InvalidInput, "--k-max must be at least 1");
  const auto grid = sweep_grid(o);
  const std::size_t n = bits_or(o, kDefaultSweepBits);
  for (std::size_t i = 0; i < grid.size(); ++i) point_config(o, grid[i], i, n);

  std::vector<std::string> rows(grid.size());
  parallel_for(grid.size(), o.jobs, [&](std::size_t i) {
    const auto& p = grid[i];
    const auto profile = stats::autocorr_profile(simulate_qrng(point_config(o, p, i, n)), o.k_max);
    const double lambda = p.f_det / p.f_bit;
    std::string block;
    for (const auto& a : profile) {
      block += std::to_string(io::kSchemaVersion) + "," + num(p.f_bit) + "," + num(p.f_det) + "," + num(lambda) + "," +
               std::to_string(n) + "," + std::to_string(a.lag) + "," + num(a.value) + "," + num(a.standard_error()) +
               "," + (a.lag == 1 ? num(analytic::a1_ideal(lambda)) : std::string()) + "\n";
    }
    rows[i] = std::move(block);
  });

  std::string csv = "schema_version,f_bit,f_det,lambda,n_bits,k,a_k,stderr,ideal_a1\n";
  for (const auto& r : rows) csv += r;
  const fs::path out = o.out.empty() ? fs::path("sweep_autocorr.csv") : fs::path(o.out);
  ensure_parent(out);
  io::write_text_atomic(out, csv);
  write_manifest(manifest_path_for(out), o, started, {out});
  log << "wrote " << grid.size() << " points to " << out.string() << "\n";
  return kExitOk;
}

int cmd_test(const Options& o, std::ostream& log) {
  const std::string started = utc_now();
  if (o.inputs.empty()) throw Error(ErrorCode::InvalidInput, "no input bitstream given");
  sts::BatteryOptions opt;
  opt.block_size = o.block_size;
  opt.apen_m = o.apen_m;
  opt.jobs = o.jobs;
  opt.tests.clear();
  for (const auto& t : o.tests) opt.tests.push_back(test_kind(t));

  // per input string, reports in battery order
  std::vector<std::vector<sts::TestReport>> per_string;
  for (const auto& in : o.inputs) per_string.push_back(sts::run_battery(io::read_bitstream(in), opt));

  const fs::path dir = o.out.empty() ? fs::path("sts_report") : fs::path(o.out);
  fs::create_directories(dir);
  std::vector<fs::path> outputs;
  json summary_tests = json::array();
  bool all_ok = true;

  for (std::size_t t = 0; t < per_string.front().size(); ++t) {
    const std::string name = per_string.front()[t].test_name;
    json strings = json::array();
    std::vector<double> pooled, string_uniformity;
    bool ok = true;
    for (std::size_t s = 0; s < per_string.size(); ++s) {
      const auto& r = per_string[s][t];
      ok = ok && r.proportion.ok();
      pooled.insert(pooled.end(), r.p_values.begin(), r.p_values.end());
      if (r.uniformity_p) string_uniformity.push_back(*r.uniformity_p);
      strings.push_back({{"input", o.inputs[s]},
                         {"n_blocks", r.p_values.size()},
                         {"p_values", r.p_values},
                         {"uniformity_p", r.uniformity_p ? json(*r.uniformity_p) : json(nullptr)},
                         {"proportion",
                          {{"passed", r.proportion.passed},
                           {"total", r.proportion.total},
                           {"threshold", r.proportion.threshold}}},
                         {"passed", r.passed()}});
    }
    all_ok = all_ok && ok;
    json report = {{"schema_version", io::kSchemaVersion}, {"test", name},    {"block_size", o.block_size},
                   {"strings", strings},                   {"proportion_ok", ok}};
    if (string_uniformity.size() > 1) {
      report["median_uniformity_p"] = stats::median(string_uniformity);
      report["string_uniformity_p"] = string_uniformity;
    }

    const std::string base = slug(name);
    const fs::path json_path = dir / (base + ".json");
    io::write_text_atomic(json_path, report.dump(2) + "\n");
    outputs.push_back(json_path);

    auto write_cdf = [&](const fs::path& path, const std::vector<double>& p) {
      std::string csv = "schema_version,rank,rank_fraction,p_value\n";
      std::size_t rank = 0;
      for (const auto& pt : sts::pvalue_cdf(p)) {
        csv += std::to_string(io::kSchemaVersion) + "," + std::to_string(++rank) + "," + num(pt.rank_fraction) + "," +
               num(pt.p_value) + "\n";
      }
      io::write_text_atomic(path, csv);
      outputs.push_back(path);
    };
    write_cdf(dir / (base + "_cdf.csv"), pooled);
    if (string_uniformity.size() > 1) write_cdf(dir / (base + "_strings_cdf.csv"), string_uniformity);

    summary_tests.push_back({{"test", name}, {"proportion_ok", ok}});
    log << name << ": " << (ok ? "pass" : "FAIL") << "\n";
  }

  const json summary = {{"schema_version", io::kSchemaVersion},
                        {"inputs", o.inputs},
                        {"block_size", o.block_size},
                        {"tests", summary_tests},
                        {"all_passed", all_ok},
                        {"unimplemented_tests", sts::unimplemented_tests()}};
  const fs::path summary_path = dir / "summary.json";
  io::write_text_atomic(summary_path, summary.dump(2) + "\n");
  outputs.push_back(summary_path);
  write_manifest(dir / "manifest.json", o, started, outputs);
  return all_ok ? kExitOk : kExitTestFailed;
}

int cmd_analyze(const Options& o, std::ostream& out) {
  const std::string started = utc_now();
  if (o.inputs.empty()) throw Error(ErrorCode::InvalidInput, "no input bitstream given");
  if (o.k_max == 0) throw Error(ErrorCode::InvalidInput, "--k-max must be at least 1");
  json result;
  if (o.inputs.size() == 1) {
    result = analyze_one(io::read_bitstream(o.inputs.front()), o);
  } else {
    json strings = json::array();
    std::vector<double> biases;
    std::vector<std::vector<double>> lags(o.k_max);
    for (const auto& in : o.inputs) {
      auto one = analyze_one(io::read_bitstream(in), o);
      biases.push_back(one["bias"]["value"].get<double>());
      for (std::size_t k = 0; k < o.k_max; ++k) lags[k].push_back(one["autocorr"][k]["value"].get<double>());
      one["input"] = in;
      strings.push_back(std::move(one));
    }
    json med_ac = json::array();
    for (std::size_t k = 0; k < o.k_max; ++k) med_ac.push_back({{"k", k + 1}, {"value", stats::median(lags[k])}});
    result = {{"strings", strings}, {"median", {{"bias", stats::median(biases)}, {"autocorr", med_ac}}}};
  }
  result["schema_version"] = io::kSchemaVersion;
  emit_json(o, result, out, started);
  return kExitOk;
}

int cmd_predict(const Options& o, std::ostream& out) {
  const std::string started = utc_now();
  const auto op = analytic::OperatingPoint::make(single(o.f_det, 45e6, "--f-det"), single(o.f_bit, 20e6, "--f-bit"));
  const auto a = analog_model(o);
  const double b = analytic::predicted_bias(a, op.f_det);
  const double a1 = analytic::a1_ideal(op.lambda);
  json chain = json::array();
  std::size_t n = 0;
  for (const auto& c : analytic::xor_chain({b, a1}, std::max<std::size_t>(o.stages, 1))) {
    chain.push_back({{"stages", ++n}, {"bias", c.bias}, {"a1", c.a1}});
  }
  const json result = {{"schema_version", io::kSchemaVersion},
                       {"f_det", op.f_det},
                       {"f_bit", op.f_bit},
                       {"lambda", op.lambda},
                       {"alpha", analytic::bias_coefficient(a)},
                       {"eta", a.eta},
                       {"zero_bias_eta", analytic::zero_bias_eta(a.t_rise, a.t_fall)},
                       {"bias", b},
                       {"a1", a1},
                       {"s1", analytic::same_bit_prob_s1(op.lambda)},
                       {"xor_chain", chain}};
  emit_json(o, result, out, started);
  return kExitOk;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Random flip-flop QRNG simulator and randomness test toolkit"};
  app.name("rffqrng");
  app.require_subcommand(1, 1);
  app.set_config("--config", "", "Read flat 'key = value' settings; command-line flags take precedence");
  app.set_version_flag("--version", RFFQRNG_VERSION);

  Options o;
  std::vector<std::string> f_det_items, f_bit_items;
  std::string n_bits_s, block_size_s, n_events_s, k_max_s;
  double phase = 0;
  std::string manifest;

  app.add_option("--f-det", f_det_items, "Detection rate in Hz; sweeps accept lists and start:stop:step")
      ->delimiter(',');
  app.add_option("--f-bit", f_bit_items, "Bit (sampling clock) rate in Hz; lists as --f-det")->delimiter(',');
  app.add_option("--dead-time", o.dead_time, "Detector dead time in s")->capture_default_str();
  app.add_option("--eta", o.eta, "Threshold level as a fraction of the swing")->capture_default_str();
  app.add_flag("--zero-bias-eta", o.zero_bias_eta, "Use the threshold that cancels bias for the given edges");
  app.add_option("--t-rise", o.t_rise, "10-90 rise time in s")->capture_default_str();
  app.add_option("--t-fall", o.t_fall, "10-90 fall time in s")->capture_default_str();
  app.add_option("--stages", o.stages, "Number of XOR-combined flip-flop stages")->capture_default_str();
  app.add_option("--n-bits", n_bits_s, "Bits to generate (per sweep point); scientific notation allowed");
  app.add_option("--seed", o.seed, "Master seed")->capture_default_str();
  auto* phase_opt = app.add_option("--phase", phase, "Clock phase in s (default: drawn from the seed)");
  app.add_flag("--initial-state", o.initial_state, "Start the flip-flop HIGH");
  app.add_option("--block-size", block_size_s, "Test block size in bits (default 1e6)");
  app.add_option("--apen-m", o.apen_m, "Approximate entropy block lengths")->delimiter(',')->capture_default_str();
  app.add_option("--tests", o.tests, "Tests to run: frequency,apen,fft,universal,runs")->delimiter(',');
  app.add_option("--jobs", o.jobs, "Worker threads")->capture_default_str();
  app.add_option("--k-max", k_max_s, "Highest autocorrelation lag (default 4)");
  app.add_option("--entropy-l", o.entropy_l, "n-gram lengths for entropy")->delimiter(',')->capture_default_str();
  app.add_option("--out", o.out, "Output file (directory for 'test')");
  app.add_option("--export-detections", o.export_detections, "Also write stage-1 detection times (generate)");
  app.add_option("--n-events", n_events_s, "Number of detection times to export");
  app.add_option("--manifest", manifest, "Re-run the command recorded in a run manifest");

  auto* gen = app.add_subcommand("generate", "Simulate the generator and write a packed bitstream");
  auto* sb = app.add_subcommand("sweep-bias", "Measured and predicted bias over an f_bit x f_det grid (CSV)");
  auto* sa = app.add_subcommand("sweep-autocorr", "Autocorrelation a_1..a_kmax over an f_bit x f_det grid (CSV)");
  auto* tst = app.add_subcommand("test", "Run the statistical test battery on bitstream files");
  auto* ana = app.add_subcommand("analyze", "Bias, autocorrelation and n-gram entropy of bitstream files (JSON)");
  auto* pre = app.add_subcommand("predict", "Closed-form bias, a1 and XOR-chain predictions (JSON)");
  tst->add_option("inputs", o.inputs, "Bitstream files");
  ana->add_option("inputs", o.inputs, "Bitstream files");
  for (auto* s : {gen, sb, sa, tst, ana, pre}) s->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    o.command = app.get_subcommands().front()->get_name();
    if (!manifest.empty()) {
      const auto m = io::read_json(manifest);
      const std::string cli_out = o.out;
      const int cli_jobs = static_cast<int>(o.jobs);
      Options from = options_from_json(m.at("options"));
      if (from.command != o.command) {
        throw Error(ErrorCode::InvalidInput, "manifest records '" + from.command + "', not '" + o.command + "'");
      }
      if (!cli_out.empty()) from.out = cli_out;
      if (app.get_option("--jobs")->count() > 0) from.jobs = static_cast<unsigned>(cli_jobs);
      o = std::move(from);
    } else {
      o.f_det = parse_grid(f_det_items);
      o.f_bit = parse_grid(f_bit_items);
      if ((!f_det_items.empty() && o.f_det.empty()) || (!f_bit_items.empty() && o.f_bit.empty())) {
        throw Error(ErrorCode::InvalidInput, "sweep grid is empty");
      }
      if (!n_bits_s.empty()) o.n_bits = parse_count(n_bits_s);
      if (!block_size_s.empty()) o.block_size = parse_count(block_size_s);
      if (!n_events_s.empty()) o.n_events = parse_count(n_events_s);
      if (!k_max_s.empty()) o.k_max = parse_count(k_max_s);
      if (phase_opt->count() > 0) o.phase = phase;
      if (o.n_bits == 0 && !n_bits_s.empty()) throw Error(ErrorCode::InvalidInput, "--n-bits must be positive");
      if (o.jobs == 0) throw Error(ErrorCode::InvalidInput, "--jobs must be at least 1");
    }

    if (o.command == "generate") return cmd_generate(o, out);
    if (o.command == "sweep-bias") return cmd_sweep_bias(o, out);
    if (o.command == "sweep-autocorr") return cmd_sweep_autocorr(o, out);
    if (o.command == "test") return cmd_test(o, out);
    if (o.command == "analyze") return cmd_analyze(o, out);
    if (o.command == "predict") return cmd_predict(o, out);
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}

}  // namespace rffqrng::cli

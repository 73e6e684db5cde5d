#include "cli.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <openssl/evp.h>

#include "slepian/errors.hpp"
#include "slepian/ingest.hpp"
#include "slepian/pipeline.hpp"
#include "slepian/region_window.hpp"
#include "slepian/synth.hpp"

#ifndef SLEPIAN_DATA_DIR
#define SLEPIAN_DATA_DIR "data"
#endif

namespace fs = std::filesystem;

namespace slepian::cli {

std::string sha256_bytes(const std::string& bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
  EVP_DigestUpdate(ctx, bytes.data(), bytes.size());
  EVP_DigestFinal_ex(ctx, md, &len);
  EVP_MD_CTX_free(ctx);
  std::string hex;
  char buf[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(buf, sizeof(buf), "%02x", md[i]);
    hex += buf;
  }
  return hex;
}

std::string sha256_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingInput("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return sha256_bytes(ss.str());
}

namespace {

void require_exists(const std::string& path, const char* what) {
  if (!fs::exists(path)) throw MissingInput(std::string(what) + " not found: " + path);
}

void write_file(const fs::path& path, const std::string& content) {
  const fs::path tmp = path.string() + ".partial";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw ConfigurationError("cannot write " + path.string());
    out << content;
    if (!out) throw ConfigurationError("failed writing " + path.string());
  }
  fs::rename(tmp, path);
}

// Exclusive marker in an output directory; removed when the run ends.
class DirectoryLock {
 public:
  explicit DirectoryLock(const fs::path& dir) : path_(dir / ".slepian.lock") {
    fs::create_directories(dir);
    std::FILE* f = std::fopen(path_.c_str(), "wx");
    if (!f) {
      throw ConfigurationError("output directory " + dir.string() +
                               " is locked by another run (" + path_.string() + ")");
    }
    std::fclose(f);
  }
  ~DirectoryLock() {
    std::error_code ec;
    fs::remove(path_, ec);
  }
  DirectoryLock(const DirectoryLock&) = delete;
  DirectoryLock& operator=(const DirectoryLock&) = delete;

 private:
  fs::path path_;
};

std::string region_key(const Region& region, int L) {
  std::ostringstream ss;
  ss.precision(17);
  for (const auto& b : region.boxes()) {
    ss << b.theta1() << ',' << b.theta2() << ',' << b.phi1() << ',' << b.phi2() << ';';
  }
  ss << "L=" << L;
  return sha256_bytes(ss.str()).substr(0, 16);
}

fs::path default_cache_path(const Region& region, int L, const fs::path& out) {
  fs::path dir;
  if (const char* env = std::getenv("SLEPIAN_CACHE_DIR"); env && *env) {
    dir = env;
  } else {
    dir = out.has_parent_path() ? out.parent_path() : fs::path(".");
  }
  return dir / ("kernel_" + region_key(region, L) + "_L" + std::to_string(L) + ".bin");
}

struct Manifest {
  std::vector<std::pair<std::string, std::string>> settings;
  std::vector<std::pair<std::string, std::string>> inputs;  // label, sha256
  std::vector<std::pair<std::string, std::string>> outputs;

  std::string str() const {
    std::string s = "# slepian run manifest\n";
    for (const auto& [k, v] : settings) s += k + ": " + v + "\n";
    for (const auto& [k, v] : inputs) s += "input " + k + " " + v + "\n";
    for (const auto& [k, v] : outputs) s += "output " + k + " " + v + "\n";
    return s;
  }
};

std::map<std::string, std::string> previous_inputs(const fs::path& manifest) {
  std::map<std::string, std::string> out;
  std::ifstream in(manifest);
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("input ", 0) != 0) continue;
    const auto sp = line.rfind(' ');
    out[line.substr(6, sp - 6)] = line.substr(sp + 1);
  }
  return out;
}

// Reports whether a previous manifest in the same directory saw the same
// inputs, then replaces it.
void write_manifest(const fs::path& dir, const Manifest& m, std::ostream& out) {
  const fs::path path = dir / "run_manifest.txt";
  if (fs::exists(path)) {
    const auto before = previous_inputs(path);
    int changed = 0;
    for (const auto& [k, v] : m.inputs) {
      const auto it = before.find(k);
      if (it == before.end() || it->second != v) ++changed;
    }
    for (const auto& [k, v] : before) {
      const bool kept = std::any_of(m.inputs.begin(), m.inputs.end(),
                                    [&](const auto& in) { return in.first == k; });
      if (!kept) ++changed;
    }
    if (changed == 0) {
      out << "manifest: input hashes match the previous run\n";
    } else {
      out << "manifest: " << changed << " input(s) differ from the previous run\n";
    }
  }
  write_file(path, m.str());
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.15g", v);
  return buf;
}

void hash_dir(const fs::path& dir, const std::string& label, Manifest& m) {
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file()) files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& f : files) {
    m.inputs.emplace_back(label + "/" + f.filename().string(), sha256_file(f.string()));
  }
}

struct DesignArgs {
  std::string region;
  int bandlimit = 61;
  std::string out = "window.txt";
  std::string kernel_cache;
  std::string method = "shift-invert";
  int max_iterations = 10000;
};

int cmd_design_window(const DesignArgs& a, std::ostream& out, std::ostream& err) {
  require_exists(a.region, "region file");
  const Region region = load_region(a.region);
  const int L = a.bandlimit;
  if (L < 1 || L > kMaxBandlimit) throw ParameterError("bandlimit out of range");
  const fs::path out_path = a.out;
  const fs::path cache = a.kernel_cache.empty() ? default_cache_path(region, L, out_path)
                                                : fs::path(a.kernel_cache);

  std::optional<ConcentrationKernel> kernel;
  if (fs::exists(cache)) {
    try {
      ConcentrationKernel k = load_kernel(cache);
      if (k.bandlimit() == L) {
        kernel.emplace(std::move(k));
        out << "kernel cache: " << cache.string() << " (reused)\n";
      }
    } catch (const Error& e) {
      err << "warning: ignoring kernel cache " << cache.string() << ": " << e.what() << "\n";
    }
  }
  if (!kernel) {
    kernel.emplace(kernel_region(region, L));
    if (cache.has_parent_path()) fs::create_directories(cache.parent_path());
    save_kernel(*kernel, cache);
    out << "kernel cache: " << cache.string() << " (written)\n";
  }

  EigenOptions opts;
  opts.max_iterations = a.max_iterations;
  opts.method = a.method == "power" ? EigenMethod::power : EigenMethod::shift_invert;
  WindowFunction w = solve_max_concentration(*kernel, opts);
  w.region = region;
  if (out_path.has_parent_path()) fs::create_directories(out_path.parent_path());
  save_window(w, out_path);

  const double shannon = L * L * region.area() / (4.0 * kPi);
  out << "region: " << region.name() << " (" << region.boxes().size() << " boxes, area "
      << fmt(region.area()) << " sr)\n";
  out << "bandlimit: " << L << "\n";
  out << "lambda: " << fmt(w.lambda) << "\n";
  out << "shannon number: " << fmt(shannon) << "\n";
  out << "kernel trace: " << fmt(kernel->trace().real()) << "\n";
  out << "iterations: " << w.iterations << "\n";
  out << "window: " << out_path.string() << "\n";
  for (const auto& warning : w.warnings) err << "warning: " << warning << "\n";
  return kOk;
}

struct ProcessArgs {
  std::string stokes, swe, sms, window, region, love, out = "out", snapshot;
  std::string mean_mode = "region";
  int bandlimit = 61;
  double kappa = 200.0;
};

int cmd_process(const ProcessArgs& a, std::ostream& out, std::ostream& err) {
  require_exists(a.stokes, "Stokes directory");
  require_exists(a.swe, "SWE directory");
  require_exists(a.sms, "SMS directory");
  require_exists(a.window, "window file");
  if (!a.region.empty()) require_exists(a.region, "region file");
  const std::string love_path =
      a.love.empty() ? std::string(SLEPIAN_DATA_DIR) + "/love_numbers.csv" : a.love;
  require_exists(love_path, "Love-number file");

  PipelineConfig config;
  config.bandlimit = a.bandlimit;
  config.smoothing = SmoothingSpec(a.kappa);
  config.love = LoveNumbers::load(love_path);
  if (a.mean_mode == "region") {
    config.mean_mode = MeanMode::region;
  } else if (a.mean_mode == "window-global") {
    config.mean_mode = MeanMode::window_global;
  } else {
    throw ParameterError("unknown mean mode " + a.mean_mode);
  }
  if (!a.snapshot.empty()) config.snapshot = Epoch::parse(a.snapshot);

  const fs::path dir = a.out;
  DirectoryLock lock(dir);

  const WindowFunction window = load_window(a.window);
  std::optional<Region> region;
  if (!a.region.empty()) {
    region = load_region(a.region);
  } else if (window.region) {
    region = window.region;
  } else {
    throw ConfigurationError("no region: pass --region or use a window file that records one");
  }
  const StokesSeries stokes = load_stokes_dir(a.stokes);
  const GridSeries swe = load_grid_dir(a.swe);
  const GridSeries sms = load_grid_dir(a.sms);
  if (!swe.empty() && !sms.empty() && !swe.items.front().field.same_axes(sms.items.front().field)) {
    throw GridMismatch("SWE grid (" + std::to_string(swe.items.front().field.thetas().size()) +
                       "x" + std::to_string(swe.items.front().field.phis().size()) +
                       ") differs from SMS grid (" +
                       std::to_string(sms.items.front().field.thetas().size()) + "x" +
                       std::to_string(sms.items.front().field.phis().size()) + ")");
  }
  int missing = 0;
  for (const auto& g : swe.items) missing += g.missing;
  for (const auto& g : sms.items) missing += g.missing;

  const PipelineResult result = run_monthly(stokes, swe, sms, window, *region, config);

  const std::string csv = format_series_csv(result.records);
  write_file(dir / "gws_series.csv", csv);
  Manifest m;
  m.settings = {{"command", "process"},
                {"bandlimit", std::to_string(config.bandlimit)},
                {"kappa", fmt(config.smoothing.kappa())},
                {"mean_mode", a.mean_mode},
                {"snapshot", a.snapshot.empty() ? "none" : a.snapshot},
                {"months", std::to_string(result.records.size())},
                {"dropped_months", std::to_string(result.dropped.size())}};
  m.inputs.emplace_back("window", sha256_file(a.window));
  if (!a.region.empty()) m.inputs.emplace_back("region", sha256_file(a.region));
  m.inputs.emplace_back("love", sha256_file(love_path));
  hash_dir(a.stokes, "stokes", m);
  hash_dir(a.swe, "swe", m);
  hash_dir(a.sms, "sms", m);
  m.outputs.emplace_back("gws_series.csv", sha256_bytes(csv));

  if (result.snapshot) {
    const auto& s = *result.snapshot;
    const std::vector<std::pair<std::string, const GridField*>> fields = {
        {"tws", &s.tws}, {"swe", &s.swe}, {"sms", &s.sms}, {"gws", &s.gws}};
    const auto& src = swe.items.front();
    for (const auto& [name, field] : fields) {
      const std::string file = "snapshot_" + s.epoch.str() + "_" + name + ".csv";
      const std::string body = serialize_grid(*field, src.lat_deg, src.lon_deg, true);
      write_file(dir / file, body);
      m.outputs.emplace_back(file, sha256_bytes(body));
    }
  }
  write_manifest(dir, m, out);

  out << "months processed: " << result.records.size() << "\n";
  if (!result.dropped.empty()) {
    out << "dropped months:";
    for (const auto& e : result.dropped) out << " " << e.str();
    out << "\n";
  }
  if (missing > 0) err << "note: " << missing << " NA grid cells were set to zero\n";
  out << "series: " << (dir / "gws_series.csv").string() << "\n";
  return kOk;
}

struct SynthArgs {
  std::string scenario, region, out, love;
};

int cmd_synth(const SynthArgs& a, std::ostream& out, std::ostream& err) {
  require_exists(a.region, "region file");
  SyntheticScenario s;
  if (!a.scenario.empty()) {
    require_exists(a.scenario, "scenario file");
    s = load_scenario(a.scenario);
  }
  s.validate();
  const std::string love_path =
      a.love.empty() ? std::string(SLEPIAN_DATA_DIR) + "/love_numbers.csv" : a.love;
  require_exists(love_path, "Love-number file");
  const Region region = load_region(a.region);
  const fs::path dir = a.out;
  DirectoryLock lock(dir);
  const ScenarioData data = make_scenario(s, region, LoveNumbers::load(love_path));
  write_scenario(data, dir);
  write_file(dir / "scenario.txt", serialize_scenario(s));
  out << "months: " << s.months << "\n";
  out << "representability: " << fmt(data.representability) << "\n";
  out << "written: " << dir.string() << "\n";
  for (const auto& w : data.warnings) err << "warning: " << w << "\n";
  return kOk;
}

struct InspectArgs {
  std::string file, epoch;
};

int cmd_inspect_stokes(const InspectArgs& a, std::ostream& out) {
  require_exists(a.file, "Stokes file");
  std::optional<Epoch> e;
  if (!a.epoch.empty()) e = Epoch::parse(a.epoch);
  const StokesEpoch s = load_stokes(a.file, e);
  out << "epoch: " << s.epoch.str() << "\n";
  out << "lmax: " << s.lmax << "\n";
  out << "C00: " << fmt(s.c(0, 0)) << "\n";
  if (s.lmax >= 2) out << "C20: " << fmt(s.c(2, 0)) << "\n";
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Slepian window design and GRACE/GLDAS groundwater processing"};
  app.set_config("--config", "", "INI/TOML file with option defaults");
  app.require_subcommand(1);

  DesignArgs design;
  auto* d = app.add_subcommand("design-window", "Build the concentration kernel and window");
  d->add_option("--region", design.region, "Region CSV (degrees)")->required();
  d->add_option("--bandlimit", design.bandlimit, "Bandlimit L")->capture_default_str();
  d->add_option("--out", design.out, "Window file to write")->capture_default_str();
  d->add_option("--kernel-cache", design.kernel_cache,
                "Kernel cache file (default: SLEPIAN_CACHE_DIR or the output directory)");
  d->add_option("--eigen-method", design.method, "shift-invert or power")
      ->check(CLI::IsMember({"shift-invert", "power"}))
      ->capture_default_str();
  d->add_option("--max-iterations", design.max_iterations, "Iteration cap")->capture_default_str();

  ProcessArgs proc;
  auto* p = app.add_subcommand("process", "Run the monthly GWS pipeline");
  p->add_option("--stokes", proc.stokes, "Directory of Stokes files")->required();
  p->add_option("--swe", proc.swe, "Directory of SWE grids")->required();
  p->add_option("--sms", proc.sms, "Directory of SMS grids")->required();
  p->add_option("--window", proc.window, "Window file")->required();
  p->add_option("--region", proc.region, "Region CSV (default: the window's region)");
  p->add_option("--love", proc.love, "Love-number CSV");
  p->add_option("--bandlimit", proc.bandlimit, "Bandlimit L")->capture_default_str();
  p->add_option("--kappa", proc.kappa, "Smoothing concentration")->capture_default_str();
  p->add_option("--mean-mode", proc.mean_mode, "region or window-global")
      ->check(CLI::IsMember({"region", "window-global"}))
      ->capture_default_str();
  p->add_option("--snapshot", proc.snapshot, "YYYY-MM month to export as grids");
  p->add_option("--out", proc.out, "Output directory")->capture_default_str();

  SynthArgs syn;
  auto* s = app.add_subcommand("synth", "Write a synthetic scenario in the input formats");
  s->add_option("--scenario", syn.scenario, "key=value scenario file");
  s->add_option("--region", syn.region, "Region CSV")->required();
  s->add_option("--out", syn.out, "Output directory")->required();
  s->add_option("--love", syn.love, "Love-number CSV");

  InspectArgs insp;
  auto* i = app.add_subcommand("inspect-stokes", "Summarize one Stokes file");
  i->add_option("file", insp.file, "Stokes file")->required();
  i->add_option("--epoch", insp.epoch, "YYYY-MM, overrides the file name");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kFailure;
  }

  try {
    if (*d) return cmd_design_window(design, out, err);
    if (*p) return cmd_process(proc, out, err);
    if (*s) return cmd_synth(syn, out, err);
    if (*i) return cmd_inspect_stokes(insp, out);
  } catch (const MissingInput& e) {
    err << "error: " << e.what() << "\n";
    return kMissingInput;
  } catch (const ConvergenceError& e) {
    err << "error: " << e.what() << "\n";
    err << "residual: " << e.residual() << " after " << e.iterations() << " iterations\n";
    return kNonconvergence;
  } catch (const PipelineError& e) {
    err << "error: " << e.what() << "\n";
    return kEmptyIntersection;
  } catch (const GridMismatch& e) {
    err << "error: " << e.what() << "\n";
    return kGridMismatch;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kFailure;
  }
  return kFailure;
}

}  // namespace slepian::cli

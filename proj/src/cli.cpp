#include "dskde/cli.hpp"

#include "dskde/bandwidth.hpp"
#include "dskde/estimators.hpp"
#include "dskde/eval.hpp"
#include "dskde/extract.hpp"
#include "dskde/io.hpp"
#include "dskde/simulate.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>

namespace dskde {

namespace fs = std::filesystem;

namespace {

std::string fixed(double v, int digits)
{
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string sci(double v, int digits)
{
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*e", digits, v);
  return buf;
}

std::vector<std::string> split_list(const std::string& s)
{
  std::vector<std::string> out;
  std::string item;
  std::istringstream ss(s);
  while (std::getline(ss, item, ',')) {
    auto b = item.find_first_not_of(" \t");
    auto e = item.find_last_not_of(" \t");
    if (b != std::string::npos)
      out.push_back(item.substr(b, e - b + 1));
  }
  return out;
}

void convert(const std::string& s, std::string& out) { out = s; }
void convert(const std::string& s, double& out)
{
  std::size_t pos = 0;
  out = std::stod(s, &pos);
  if (pos != s.size())
    throw std::invalid_argument("not a number: '" + s + "'");
}
void convert(const std::string& s, std::size_t& out)
{
  std::size_t pos = 0;
  if (!s.empty() && s.front() == '-')
    throw std::invalid_argument("not a count: '" + s + "'");
  out = std::stoull(s, &pos);
  if (pos != s.size())
    throw std::invalid_argument("not a count: '" + s + "'");
}
void convert(const std::string& s, int& out)
{
  std::size_t pos = 0;
  out = std::stoi(s, &pos);
  if (pos != s.size())
    throw std::invalid_argument("not an integer: '" + s + "'");
}
void convert(const std::string& s, bool& out)
{
  if (s == "true" || s == "1" || s == "yes" || s == "on")
    out = true;
  else if (s == "false" || s == "0" || s == "no" || s == "off")
    out = false;
  else
    throw std::invalid_argument("not a boolean: '" + s + "'");
}

// Options of one subcommand, addressable by their long name so that config
// file keys can fill whatever the command line left unset.
class Settings
{
public:
  explicit Settings(CLI::App* sub)
    : sub_(sub)
  {
    sub_->add_option("--config", config_path_, "key = value file; command-line flags take precedence");
  }

  template<typename T>
  CLI::Option* option(const std::string& name, T& var, const std::string& help)
  {
    auto* opt = sub_->add_option("--" + name, var, help)->capture_default_str();
    entries_[name] = { opt, [&var, name](const std::string& v) {
                        try {
                          convert(v, var);
                        } catch (const std::exception&) {
                          throw std::invalid_argument("config key '" + name + "': bad value '" + v + "'");
                        }
                      } };
    return opt;
  }

  CLI::Option* flag(const std::string& name, bool& var, const std::string& help)
  {
    auto* opt = sub_->add_flag("--" + name, var, help);
    entries_[name] = { opt, [&var, name](const std::string& v) {
                        try {
                          convert(v, var);
                        } catch (const std::exception&) {
                          throw std::invalid_argument("config key '" + name + "': bad value '" + v + "'");
                        }
                      } };
    return opt;
  }

  //! Applies the config file, if any. Returns the keys it supplied.
  void resolve()
  {
    if (config_path_.empty())
      return;
    for (const auto& [key, value] : read_config(config_path_)) {
      auto it = entries_.find(key);
      if (it == entries_.end())
        throw std::invalid_argument("unknown config key '" + key + "' for " + sub_->get_name());
      if (it->second.opt->count() == 0) {
        it->second.set(value);
        from_config_.push_back(key);
      }
    }
  }

  //! Set on the command line or in the config file.
  bool given(const std::string& name) const
  {
    auto it = entries_.find(name);
    if (it != entries_.end() && it->second.opt->count() > 0)
      return true;
    return std::find(from_config_.begin(), from_config_.end(), name) != from_config_.end();
  }

  void require(const std::string& name) const
  {
    if (!given(name))
      throw std::invalid_argument(sub_->get_name() + ": --" + name + " is required");
  }

private:
  struct Entry
  {
    CLI::Option* opt = nullptr;
    std::function<void(const std::string&)> set;
  };
  CLI::App* sub_;
  std::string config_path_;
  std::map<std::string, Entry> entries_;
  std::vector<std::string> from_config_;
};

template<typename Fn>
void with_output(const std::string& path, std::ostream& fallback, Fn&& fn)
{
  if (path.empty() || path == "-") {
    fn(fallback);
    return;
  }
  std::ofstream os(path);
  if (!os)
    throw format_error("cannot write " + path);
  fn(os);
  if (!os)
    throw format_error("write failed for " + path);
}

// ---- bandwidth

struct BandwidthCmd
{
  std::string frames;
  std::size_t stride = 1;
  std::size_t n = 0;
  std::size_t m = 0;
  double sigma = 0.0;
  std::string variant = "ds";
  double cd_constant = silverman_constant;

  void run(const Settings& s, std::ostream& out) const
  {
    std::size_t nn = n;
    std::size_t mm = m;
    double sg = sigma;
    if (s.given("frames")) {
      const auto stack = load_frames(fs::path(frames), stride);
      nn = stack.n();
      mm = stack.lattice_size();
      sg = empirical_sigma(stack);
    } else {
      s.require("n");
      s.require("m");
      s.require("sigma");
    }
    const Variant v = parse_variant(variant);
    const double h = v == Variant::gpa_ds ? ds_bandwidth(nn, mm, sg) : cd_bandwidth(nn, sg, cd_constant);
    const auto c = mse_constants(sg);
    out << "variant=" << to_string(v) << '\n'
        << "n=" << nn << '\n'
        << "m=" << mm << '\n'
        << "sigma=" << fixed(sg, 4) << '\n'
        << "h=" << fixed(h, 4) << '\n'
        << "h_star=" << sci(h < 1.0 ? gpa_bandwidth(h) : 5.0 * h * h, 4) << '\n'
        << "C1=" << sci(c.c1, 4) << '\n'
        << "C2=" << sci(c.c2, 4) << '\n';
  }
};

// ---- fit

struct FitCmd
{
  std::string frames;
  std::size_t stride = 1;
  std::size_t g_star = 500;
  std::string variant = "ds";
  std::size_t seed = 0;
  std::string out_path;
  std::string grid = "random";
  double trunc = default_truncation;
  double cd_constant = silverman_constant;
  double h = 0.0;
  double h_star = 0.0;

  void run(const Settings& s, std::ostream& out) const
  {
    s.require("frames");
    s.require("out");
    const auto stack = load_frames(fs::path(frames), stride);
    FitOptions opts;
    opts.g_star = g_star;
    opts.variant = parse_variant(variant);
    opts.seed = seed;
    opts.radius_bandwidths = trunc;
    if (grid == "random")
      opts.grid = GridKind::uniform_random;
    else if (grid == "even")
      opts.grid = GridKind::evenly_spaced;
    else
      throw std::invalid_argument("fit: --grid must be 'random' or 'even'");

    BandwidthOptions bw;
    bw.cd_constant = cd_constant;
    BandwidthPlan plan;
    if (s.given("bandwidth")) {
      plan.sigma_hat = empirical_sigma(stack);
      plan.n = stack.n();
      plan.m = stack.lattice_size();
      plan.h = h;
      plan.h_star = s.given("query-bandwidth") ? h_star : gpa_bandwidth(h);
    } else {
      plan = plan_bandwidth(stack, opts.variant, bw);
      if (s.given("query-bandwidth"))
        plan.h_star = h_star;
    }
    plan.validate();

    const auto t0 = std::chrono::steady_clock::now();
    const GpaTable table = gpa_fit(stack, plan, opts);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    save_model(table, out_path);
    out << "fitted " << to_string(table.variant()) << " model: " << stack.n() << " frames, " << table.rows()
        << "x" << table.cols() << " lattice, G*=" << table.g_star() << ", h=" << sci(plan.h, 4)
        << ", h*=" << sci(plan.h_star, 4) << ", sigma=" << fixed(plan.sigma_hat, 4) << ", " << fixed(secs, 2)
        << " s -> " << out_path << '\n';
  }
};

// ---- score

struct ScoreCmd
{
  std::string model;
  std::string frame;
  std::string out_path;
  std::string csv_path;

  void run(const Settings& s, std::ostream& out) const
  {
    s.require("model");
    s.require("frame");
    s.require("out");
    const GpaTable table = load_model(model);
    const Frame f = read_pgm(frame);
    const DensityMap density = density_map(table, f);
    write_pgm(out_path, rescale01(density));
    if (!csv_path.empty()) {
      std::ofstream os(csv_path);
      if (!os)
        throw format_error("cannot write " + csv_path);
      os << std::setprecision(17);
      for (std::size_t r = 0; r < density.rows(); ++r) {
        for (std::size_t c = 0; c < density.cols(); ++c)
          os << (c ? "," : "") << density(r, c);
        os << '\n';
      }
    }
    out << "density map " << density.rows() << "x" << density.cols() << " -> " << out_path << '\n';
  }
};

// ---- detect

struct DetectCmd
{
  std::string model;
  std::string frames;
  std::size_t stride = 1;
  DetectionParams params;
  std::string out_path;
  std::string dump_dir;

  void run(const Settings& s, std::ostream& out) const
  {
    s.require("model");
    s.require("frames");
    DetectionParams p = params;
    // an explicit minimum area is taken literally
    p.scale_min_area = !s.given("min-area");
    p.validate();

    const GpaTable table = load_model(model);
    const auto paths = list_frames(fs::path(frames));
    if (paths.empty())
      throw format_error("no .pgm frames in " + frames);
    if (stride < 1)
      throw std::invalid_argument("detect: stride must be at least 1");
    if (!dump_dir.empty())
      fs::create_directories(dump_dir);

    std::vector<Detection> detections;
    for (std::size_t k = 0; k < paths.size(); k += stride) {
      const Frame f = read_pgm(paths[k]);
      const auto t0 = std::chrono::steady_clock::now();
      const DetectionStages st = detect_stages(table, f, p);
      const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      const std::string id = paths[k].stem().string();
      detections.push_back({ id, st.box, secs });
      if (!dump_dir.empty()) {
        const fs::path d(dump_dir);
        write_pgm(d / (id + ".rescaled.pgm"), st.rescaled);
        write_pgm(d / (id + ".foreground.pgm"), st.foreground);
        write_pgm(d / (id + ".blurred.pgm"), st.blurred);
        Grid2<std::uint8_t> mask(st.mask.rows(), st.mask.cols());
        for (std::size_t i = 0; i < mask.size(); ++i)
          mask[i] = st.mask[i] ? 255 : 0;
        write_pgm(d / (id + ".mask.pgm"), mask);
      }
    }
    with_output(out_path, out, [&](std::ostream& os) { write_detections(os, detections); });
  }
};

// ---- simulate

struct SimulateCmd
{
  std::string out_path;
  std::size_t p = 64;
  std::size_t q = 64;
  std::string n_values = "100,400";
  double sigma = 0.16;
  std::size_t seed = 1;
  std::size_t g_star = 500;
  std::size_t g_plus = 100;
  std::size_t reps = 20;
  std::string estimators = "cd,ds,gpa-cd,gpa-ds";
  std::string mean_field;
  std::string plot;
  double cd_constant = silverman_constant;
  double trunc = default_truncation;

  SimConfig config() const
  {
    SimConfig cfg;
    cfg.p = p;
    cfg.q = q;
    cfg.sigma = sigma;
    cfg.seed = seed;
    cfg.g_star = g_star;
    cfg.g_plus = g_plus;
    cfg.reps = reps;
    cfg.cd_constant = cd_constant;
    cfg.radius_bandwidths = trunc;
    cfg.n_values.clear();
    for (const auto& v : split_list(n_values)) {
      std::size_t n = 0;
      convert(v, n);
      cfg.n_values.push_back(n);
    }
    if (cfg.n_values.empty())
      throw std::invalid_argument("simulate: --n-values is empty");
    cfg.n = cfg.n_values.front();
    if (!mean_field.empty()) {
      Frame mu = read_pgm(mean_field);
      cfg.p = mu.rows();
      cfg.q = mu.cols();
      cfg.mean_field = std::move(mu);
    }
    return cfg;
  }

  std::vector<Estimator> estimator_list() const
  {
    std::vector<Estimator> out;
    for (const auto& e : split_list(estimators))
      out.push_back(parse_estimator(e));
    if (out.empty())
      throw std::invalid_argument("simulate: --estimators is empty");
    return out;
  }

  void run(const Settings&, std::ostream& out) const
  {
    const SimConfig cfg = config();
    const auto est = estimator_list();
    const MseReport report = run_mse_benchmark(cfg, est, cfg.n_values);
    with_output(out_path, out, [&](std::ostream& os) { write_report_csv(report, os); });
    if (!plot.empty())
      write_pgm(plot, report_plot(report));
    if (!out_path.empty() && out_path != "-")
      out << "benchmark " << cfg.p << "x" << cfg.q << ", " << cfg.reps
          << " replications; CD-type estimators use the CD rule-of-thumb bandwidth, DS-type the DS rule -> "
          << out_path << '\n';
  }
};

// ---- eval

struct EvalCmd
{
  std::string detections;
  std::string annotations;
  bool inclusive = false;

  void run(const Settings& s, std::ostream& out) const
  {
    s.require("detections");
    s.require("annotations");
    const auto dets = read_detections(detections);
    const auto anns = read_annotations(annotations, inclusive);
    const EvalReport r = evaluate(dets, anns);
    out << "# IoU statistics cover frames with both a detected and an annotated box\n"
        << "frames=" << dets.size() << " tp=" << r.tp << " fp=" << r.fp << " fn=" << r.fn << " tn=" << r.tn
        << " iou_frames=" << r.iou_frames << '\n'
        << "avg_time=" << sci(r.mean_seconds, 4) << '\n'
        << "avg_f1=" << fixed(r.f1, 4) << '\n'
        << "avg_iou=" << fixed(r.mean_iou, 4) << '\n'
        << "med_iou=" << fixed(r.median_iou, 4) << '\n';
  }
};

} // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
  CLI::App app{ "Doubly smoothed density estimation for fixed-camera image stacks", "dskde" };
  app.require_subcommand(1);

  BandwidthCmd bw;
  auto* bw_sub = app.add_subcommand("bandwidth", "Rule-of-thumb bandwidths and MSE constants");
  Settings bw_s(bw_sub);
  bw_s.option("frames", bw.frames, "Directory of PGM frames");
  bw_s.option("stride", bw.stride, "Use every stride-th frame");
  bw_s.option("n", bw.n, "Frame count N");
  bw_s.option("m", bw.m, "Lattice size M = p q");
  bw_s.option("sigma", bw.sigma, "Pixel standard deviation");
  bw_s.option("variant", bw.variant, "ds or cd");
  bw_s.option("cd-constant", bw.cd_constant, "Constant of the CD rule");

  FitCmd fit;
  auto* fit_sub = app.add_subcommand("fit", "Precompute a GPA table from training frames");
  Settings fit_s(fit_sub);
  fit_s.option("frames", fit.frames, "Directory of PGM frames");
  fit_s.option("stride", fit.stride, "Use every stride-th frame");
  fit_s.option("gstar", fit.g_star, "Number of value-grid points G*");
  fit_s.option("variant", fit.variant, "ds or cd");
  fit_s.option("seed", fit.seed, "Seed of the value grid");
  fit_s.option("out", fit.out_path, "Model file to write");
  fit_s.option("grid", fit.grid, "random or even");
  fit_s.option("trunc", fit.trunc, "Spatial truncation radius in bandwidths");
  fit_s.option("cd-constant", fit.cd_constant, "Constant of the CD rule");
  fit_s.option("bandwidth", fit.h, "Override the rule-of-thumb bandwidth h");
  fit_s.option("query-bandwidth", fit.h_star, "Override the query bandwidth h* (default 5 h^2)");

  ScoreCmd score;
  auto* score_sub = app.add_subcommand("score", "Density map of one frame");
  Settings score_s(score_sub);
  score_s.option("model", score.model, "Model file");
  score_s.option("frame", score.frame, "PGM frame");
  score_s.option("out", score.out_path, "Rescaled density map (PGM)");
  score_s.option("csv", score.csv_path, "Raw density values (CSV)");

  DetectCmd det;
  auto* det_sub = app.add_subcommand("detect", "Extract the anomalous region of each frame");
  Settings det_s(det_sub);
  det_s.option("model", det.model, "Model file");
  det_s.option("frames", det.frames, "Directory of PGM frames");
  det_s.option("stride", det.stride, "Use every stride-th frame");
  det_s.option("alpha1", det.params.alpha1, "Background threshold");
  det_s.option("alpha2", det.params.alpha2, "Binarization threshold");
  det_s.option("pool", det.params.pool, "Average pooling window (odd)");
  det_s.option("min-area", det.params.min_area,
               "Minimum component area; scaled to the lattice unless given explicitly");
  det_s.option("connectivity", det.params.connectivity, "4 or 8");
  det_s.option("out", det.out_path, "Detections CSV (stdout if omitted)");
  det_s.option("dump-dir", det.dump_dir, "Write intermediate stages as PGM images");

  SimulateCmd sim;
  auto* sim_sub = app.add_subcommand("simulate", "Truncated-normal MSE benchmark");
  Settings sim_s(sim_sub);
  sim_s.option("out", sim.out_path, "Report CSV (stdout if omitted)");
  sim_s.option("p", sim.p, "Lattice rows");
  sim_s.option("q", sim.q, "Lattice columns");
  sim_s.option("n-values", sim.n_values, "Comma-separated frame counts");
  sim_s.option("sigma", sim.sigma, "Truncated-normal scale");
  sim_s.option("seed", sim.seed, "Benchmark seed");
  sim_s.option("gstar", sim.g_star, "Value-grid size G*");
  sim_s.option("gplus", sim.g_plus, "Test points per replication G+");
  sim_s.option("reps", sim.reps, "Replications T");
  sim_s.option("estimators", sim.estimators, "Subset of cd,ds,gpa-cd,gpa-ds");
  sim_s.option("mean-field", sim.mean_field, "PGM mean field (replaces the synthetic one)");
  sim_s.option("plot", sim.plot, "Write a log-MSE bar chart (PGM)");
  sim_s.option("cd-constant", sim.cd_constant, "Constant of the CD rule");
  sim_s.option("trunc", sim.trunc, "Spatial truncation radius in bandwidths");

  EvalCmd ev;
  auto* ev_sub = app.add_subcommand("eval", "F1 and IoU of detections against annotations");
  Settings ev_s(ev_sub);
  ev_s.option("detections", ev.detections, "Detections CSV");
  ev_s.option("annotations", ev.annotations, "Annotations CSV");
  ev_s.flag("inclusive", ev.inclusive, "Annotation r1/c1 are inclusive");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }

  try {
    if (bw_sub->parsed()) {
      bw_s.resolve();
      bw.run(bw_s, out);
    } else if (fit_sub->parsed()) {
      fit_s.resolve();
      fit.run(fit_s, out);
    } else if (score_sub->parsed()) {
      score_s.resolve();
      score.run(score_s, out);
    } else if (det_sub->parsed()) {
      det_s.resolve();
      det.run(det_s, out);
    } else if (sim_sub->parsed()) {
      sim_s.resolve();
      sim.run(sim_s, out);
    } else if (ev_sub->parsed()) {
      ev_s.resolve();
      ev.run(ev_s, out);
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

} // namespace dskde

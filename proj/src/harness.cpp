#include "bandprec/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>

#include "bandprec/errors.hpp"
#include "bandprec/model.hpp"

namespace bandprec {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t trial_seed(std::uint64_t base_seed, std::size_t alpha_idx, std::size_t n_idx,
                         std::size_t p_idx, std::size_t trial) {
  std::uint64_t h = base_seed;
  for (std::uint64_t v : {alpha_idx, n_idx, p_idx, trial}) h = splitmix64(h ^ splitmix64(v + 1));
  return h;
}

std::size_t trial_bandwidth(std::size_t n, double alpha, std::size_t p,
                            std::optional<std::size_t> k_override) {
  const std::size_t k = k_override ? *k_override : default_bandwidth(n, alpha);
  return std::min(k, p);
}

TrialRecord run_trial(double alpha, std::size_t n, std::size_t p, std::uint64_t seed, Mode mode,
                      std::optional<std::size_t> k_override, double rho_amp, std::size_t trial,
                      bool record_timing) {
  TrialRecord rec;
  rec.alpha = alpha;
  rec.n = n;
  rec.p = p;
  rec.trial = trial;
  rec.seed = seed;
  rec.k = trial_bandwidth(n, alpha, p, k_override);
  try {
    const PrecisionModel model = build_omega({alpha, rho_amp, p});
    const SymMatrix sigma_hat = empirical_covariance(sample(model, n, seed));
    const auto t0 = std::chrono::steady_clock::now();
    const SymMatrix omega_hat = estimate(sigma_hat, {rec.k, mode, 0.0});
    const auto t1 = std::chrono::steady_clock::now();
    if (record_timing) {
      rec.elapsed_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
    }
    const double err = spectral_norm(omega_hat - model.omega());
    rec.sq_spectral_error = err * err;
  } catch (const NotPositiveDefinite& e) {
    std::ostringstream os;
    os << "trial alpha=" << alpha << " n=" << n << " p=" << p << " k=" << rec.k
       << " seed=" << seed << ": " << e.what();
    throw NotPositiveDefinite(os.str());
  }
  return rec;
}

SweepResult run_sweep(const ExperimentPlan& plan) {
  if (plan.alphas.empty() || plan.ns.empty() || plan.ps.empty()) {
    throw ParameterError("sweep grids must be nonempty");
  }
  if (plan.trials == 0) throw ParameterError("trials must be >= 1");

  struct Job {
    std::size_t ai, ni, pi, t;
  };
  std::vector<Job> jobs;
  for (std::size_t ai = 0; ai < plan.alphas.size(); ++ai)
    for (std::size_t ni = 0; ni < plan.ns.size(); ++ni)
      for (std::size_t pi = 0; pi < plan.ps.size(); ++pi)
        for (std::size_t t = 0; t < plan.trials; ++t) jobs.push_back({ai, ni, pi, t});

  std::vector<std::optional<TrialRecord>> done(jobs.size());
  std::vector<std::string> errors(jobs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      const Job& j = jobs[i];
      const std::uint64_t seed = trial_seed(plan.base_seed, j.ai, j.ni, j.pi, j.t);
      try {
        done[i] = run_trial(plan.alphas[j.ai], plan.ns[j.ni], plan.ps[j.pi], seed, plan.mode,
                            plan.k_override, plan.rho_amp, j.t, plan.record_timing);
      } catch (const std::exception& e) {
        errors[i] = e.what();
      }
    }
  };
  const unsigned threads = std::max(1u, plan.threads);
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned i = 0; i < threads; ++i) pool.emplace_back(worker);
  }

  SweepResult result;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    if (done[i]) {
      result.records.push_back(*done[i]);
      continue;
    }
    const Job& j = jobs[i];
    result.failures.push_back({plan.alphas[j.ai], plan.ns[j.ni], plan.ps[j.pi], j.t,
                               trial_seed(plan.base_seed, j.ai, j.ni, j.pi, j.t), errors[i]});
  }
  return result;
}

void write_csv(std::ostream& out, const std::vector<TrialRecord>& records) {
  out << kRecordCsvHeader << '\n';
  for (const auto& r : records) {
    out << format_double(r.alpha) << ',' << r.n << ',' << r.p << ',' << r.k << ',' << r.trial
        << ',' << r.seed << ',' << format_double(r.sq_spectral_error) << ','
        << format_double(r.elapsed_ms) << '\n';
  }
}

void write_csv(const std::vector<TrialRecord>& records, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  write_csv(out, records);
  if (!out) throw IoError("write failed for '" + path + "'");
}

namespace {

template <class T>
T parse_field(std::string_view s, std::size_t line) {
  T v{};
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
    throw IoError("malformed field '" + std::string(s) + "' on line " + std::to_string(line));
  }
  return v;
}

}  // namespace

std::vector<TrialRecord> read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kRecordCsvHeader) {
    throw IoError("missing or unexpected trial CSV header");
  }
  std::vector<TrialRecord> records;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string_view> f;
    std::string_view rest(line);
    for (std::size_t pos; (pos = rest.find(',')) != std::string_view::npos;) {
      f.push_back(rest.substr(0, pos));
      rest.remove_prefix(pos + 1);
    }
    f.push_back(rest);
    if (f.size() != 8) throw IoError("expected 8 fields on line " + std::to_string(lineno));
    TrialRecord r;
    r.alpha = parse_field<double>(f[0], lineno);
    r.n = parse_field<std::size_t>(f[1], lineno);
    r.p = parse_field<std::size_t>(f[2], lineno);
    r.k = parse_field<std::size_t>(f[3], lineno);
    r.trial = parse_field<std::size_t>(f[4], lineno);
    r.seed = parse_field<std::uint64_t>(f[5], lineno);
    r.sq_spectral_error = parse_field<double>(f[6], lineno);
    r.elapsed_ms = parse_field<double>(f[7], lineno);
    records.push_back(r);
  }
  return records;
}

std::vector<TrialRecord> read_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  return read_csv(in);
}

PlotAxis parse_axis(std::string_view name) {
  if (name == "log_p") return PlotAxis::log_p;
  if (name == "n_rate") return PlotAxis::n_rate;
  throw InvalidAxis("unknown plot axis '" + std::string(name) + "' (expected log_p|n_rate)");
}

std::vector<Series> summarize(const std::vector<TrialRecord>& records, PlotAxis axis) {
  // (alpha, fixed) -> x -> errors
  std::map<std::pair<double, std::size_t>, std::map<double, std::vector<double>>> groups;
  for (const auto& r : records) {
    if (axis == PlotAxis::log_p) {
      groups[{r.alpha, r.n}][std::log(static_cast<double>(r.p))].push_back(r.sq_spectral_error);
    } else {
      const double x = std::pow(static_cast<double>(r.n), -2.0 * r.alpha / (2.0 * r.alpha + 1.0));
      groups[{r.alpha, r.p}][x].push_back(r.sq_spectral_error);
    }
  }

  std::vector<Series> out;
  for (const auto& [key, cells] : groups) {
    Series s;
    s.alpha = key.first;
    s.fixed = key.second;
    s.label = "alpha=" + format_double(key.first) + (axis == PlotAxis::log_p ? ", n=" : ", p=") +
              std::to_string(key.second);
    std::vector<double> xs, ys;
    for (const auto& [x, errs] : cells) {
      CellPoint pt;
      pt.x = x;
      pt.count = errs.size();
      pt.min = *std::min_element(errs.begin(), errs.end());
      pt.max = *std::max_element(errs.begin(), errs.end());
      double sum = 0.0;
      for (double e : errs) sum += e;
      pt.mean = sum / static_cast<double>(errs.size());
      s.points.push_back(pt);
      xs.push_back(pt.x);
      ys.push_back(pt.mean);
    }
    if (xs.size() >= 2) s.fit = fit_line(xs, ys);
    out.push_back(std::move(s));
  }
  return out;
}

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                    "#9467bd", "#8c564b", "#e377c2", "#17becf"};

}  // namespace

std::string render_plot_svg(const std::vector<TrialRecord>& records, PlotAxis axis) {
  if (records.empty()) throw EmptyInput("render_plot needs at least one record");
  const std::vector<Series> series = summarize(records, axis);

  constexpr double width = 820, height = 520;
  constexpr double left = 80, right = 220, top = 40, bottom = 60;
  const double plot_w = width - left - right;
  const double plot_h = height - top - bottom;

  double xmin = INFINITY, xmax = -INFINITY, ymin = 0.0, ymax = -INFINITY;
  for (const auto& s : series) {
    for (const auto& pt : s.points) {
      xmin = std::min(xmin, pt.x);
      xmax = std::max(xmax, pt.x);
      ymax = std::max(ymax, pt.max);
    }
  }
  if (xmax == xmin) {
    const double pad = xmin == 0.0 ? 1.0 : std::abs(xmin) * 0.1;
    xmin -= pad;
    xmax += pad;
  } else {
    const double pad = (xmax - xmin) * 0.05;
    xmin -= pad;
    xmax += pad;
  }
  if (!(ymax > ymin)) ymax = ymin + 1.0;
  ymax *= 1.05;

  auto sx = [&](double x) { return left + (x - xmin) / (xmax - xmin) * plot_w; };
  auto sy = [&](double y) { return top + plot_h - (y - ymin) / (ymax - ymin) * plot_h; };

  std::ostringstream os;
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
     << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << width
     << "\" height=\"" << height << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n"
     << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
     << "<g font-family=\"sans-serif\" font-size=\"12\">\n";

  // Axes and ticks.
  os << "<line x1=\"" << num(left) << "\" y1=\"" << num(top + plot_h) << "\" x2=\""
     << num(left + plot_w) << "\" y2=\"" << num(top + plot_h) << "\" stroke=\"black\"/>\n"
     << "<line x1=\"" << num(left) << "\" y1=\"" << num(top) << "\" x2=\"" << num(left)
     << "\" y2=\"" << num(top + plot_h) << "\" stroke=\"black\"/>\n";
  constexpr int kTicks = 5;
  for (int i = 0; i <= kTicks; ++i) {
    const double xv = xmin + (xmax - xmin) * i / kTicks;
    const double yv = ymin + (ymax - ymin) * i / kTicks;
    os << "<line x1=\"" << num(sx(xv)) << "\" y1=\"" << num(top + plot_h) << "\" x2=\""
       << num(sx(xv)) << "\" y2=\"" << num(top + plot_h + 5) << "\" stroke=\"black\"/>\n"
       << "<text x=\"" << num(sx(xv)) << "\" y=\"" << num(top + plot_h + 20)
       << "\" text-anchor=\"middle\">" << tick_label(xv) << "</text>\n"
       << "<line x1=\"" << num(left - 5) << "\" y1=\"" << num(sy(yv)) << "\" x2=\"" << num(left)
       << "\" y2=\"" << num(sy(yv)) << "\" stroke=\"black\"/>\n"
       << "<text x=\"" << num(left - 8) << "\" y=\"" << num(sy(yv) + 4)
       << "\" text-anchor=\"end\">" << tick_label(yv) << "</text>\n";
  }
  const char* xlabel = axis == PlotAxis::log_p ? "log p" : "n^(-2 alpha / (2 alpha + 1))";
  os << "<text x=\"" << num(left + plot_w / 2) << "\" y=\"" << num(height - 15)
     << "\" text-anchor=\"middle\">" << xlabel << "</text>\n"
     << "<text x=\"20\" y=\"" << num(top + plot_h / 2) << "\" text-anchor=\"middle\" "
     << "transform=\"rotate(-90 20 " << num(top + plot_h / 2) << ")\">"
     << "mean squared spectral error</text>\n";

  for (std::size_t si = 0; si < series.size(); ++si) {
    const Series& s = series[si];
    const char* color = kPalette[si % std::size(kPalette)];
    os << "<g class=\"series\" stroke=\"" << color << "\" fill=\"" << color << "\">\n";
    for (const auto& pt : s.points) {
      const double x = sx(pt.x);
      os << "<line class=\"errorbar\" x1=\"" << num(x) << "\" y1=\"" << num(sy(pt.min))
         << "\" x2=\"" << num(x) << "\" y2=\"" << num(sy(pt.max)) << "\"/>\n"
         << "<circle class=\"point\" cx=\"" << num(x) << "\" cy=\"" << num(sy(pt.mean))
         << "\" r=\"4\"/>\n";
    }
    if (s.fit) {
      const double x0 = s.points.front().x;
      const double x1 = s.points.back().x;
      os << "<line class=\"fit\" x1=\"" << num(sx(x0)) << "\" y1=\""
         << num(sy(s.fit->intercept + s.fit->slope * x0)) << "\" x2=\"" << num(sx(x1))
         << "\" y2=\"" << num(sy(s.fit->intercept + s.fit->slope * x1))
         << "\" stroke-dasharray=\"4 3\"/>\n";
    }
    os << "</g>\n";

    const double ly = top + 10 + 20.0 * static_cast<double>(si);
    const double lx = left + plot_w + 20;
    os << "<g class=\"legend\"><rect x=\"" << num(lx) << "\" y=\"" << num(ly - 9)
       << "\" width=\"12\" height=\"12\" fill=\"" << color << "\"/><text x=\"" << num(lx + 18)
       << "\" y=\"" << num(ly + 2) << "\">" << s.label << "</text></g>\n";
  }
  os << "</g>\n</svg>\n";
  return os.str();
}

void render_plot(const std::vector<TrialRecord>& records, PlotAxis axis, const std::string& path) {
  const std::string svg = render_plot_svg(records, axis);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << svg;
  if (!out) throw IoError("write failed for '" + path + "'");
}

}  // namespace bandprec

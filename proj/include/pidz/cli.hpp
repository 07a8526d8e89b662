#pragma once

// Subcommand implementations behind tools/pidz.cpp. Each returns a process
// exit status and writes diagnostics to `err`.

#include "pidz/analysis.hpp"
#include "pidz/output.hpp"
#include "pidz/scenario_io.hpp"
#include "pidz/scenarios.hpp"
#include "pidz/sim.hpp"

#include <algorithm>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <vector>

namespace pidz::cli {

namespace fs = std::filesystem;

enum Exit : int { kOk = 0, kUsage = 1, kInvalid = 2, kAborted = 3, kIo = 4 };

inline constexpr const char* kMissingCell = "—";

struct SimulateOptions {
  std::optional<double> dt;
  std::optional<double> horizon;
  std::vector<ControllerKind> controllers;  // empty: use the scenario's
  std::optional<Wiring> wiring;
  std::optional<unsigned> seed;  // reserved, the pipeline is deterministic
};

// ---------------------------------------------------------------------------
// Plain-text tables.

namespace detail {

inline std::size_t display_width(const std::string& s) {
  std::size_t w = 0;
  for (unsigned char c : s)
    if ((c & 0xC0) != 0x80) ++w;
  return w;
}

}  // namespace detail

inline std::string render_table(const std::vector<std::string>& header,
                                const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> width(header.size(), 0);
  auto grow = [&](const std::vector<std::string>& r) {
    for (std::size_t c = 0; c < r.size() && c < width.size(); ++c)
      width[c] = std::max(width[c], detail::display_width(r[c]));
  };
  grow(header);
  for (const auto& r : rows) grow(r);
  auto line = [&](const std::vector<std::string>& r) {
    std::string s;
    for (std::size_t c = 0; c < width.size(); ++c) {
      const std::string cell = c < r.size() ? r[c] : "";
      if (c) s += " | ";
      s += cell;
      if (c + 1 < width.size()) s.append(width[c] - detail::display_width(cell), ' ');
    }
    return s + "\n";
  };
  std::string out = line(header);
  std::size_t total = 0;
  for (auto w : width) total += w;
  out += std::string(total + 3 * (width.size() - 1), '-') + "\n";
  for (const auto& r : rows) out += line(r);
  return out;
}

inline std::string render_csv(const std::vector<std::string>& header,
                              const std::vector<std::vector<std::string>>& rows) {
  auto line = [](const std::vector<std::string>& r) {
    std::string s;
    for (std::size_t c = 0; c < r.size(); ++c) {
      if (c) s += ",";
      const bool quote = r[c].find_first_of(",\"") != std::string::npos;
      if (quote) {
        s += '"';
        for (char ch : r[c]) s += ch == '"' ? std::string("\"\"") : std::string(1, ch);
        s += '"';
      } else {
        s += r[c];
      }
    }
    return s + "\n";
  };
  std::string out = line(header);
  for (const auto& r : rows) out += line(r);
  return out;
}

inline std::string error_pair(const RunMetrics& m) {
  std::string s;
  for (std::size_t i = 0; i < m.steady_state_error.size(); ++i) {
    if (i) s += "/";
    s += format_fixed(m.steady_state_error[i], 2);
  }
  return s;
}

inline std::string position_string(const VectorXd& q) {
  std::string s = "[";
  for (Eigen::Index i = 0; i < q.size(); ++i) {
    if (i) s += ",";
    s += format_number(q(i));
  }
  return s + "]";
}

// ---------------------------------------------------------------------------
// simulate

inline int cmd_simulate(const std::string& path, const std::string& output_dir,
                        const SimulateOptions& opt, std::ostream& out, std::ostream& err) {
  Scenario base;
  try {
    base = load_scenario(path);
    if (opt.dt) base.sim.dt = *opt.dt;
    if (opt.horizon) base.sim.horizon = *opt.horizon;
    if (opt.wiring) base.sim.wiring = *opt.wiring;
    std::vector<ControllerKind> controllers = opt.controllers;
    if (controllers.empty()) controllers.push_back(base.sim.controller);
    for (auto c : controllers) {
      Scenario s = base;
      s.sim.controller = c;
      validate_scenario(s);
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kInvalid;
  }

  std::vector<ControllerKind> controllers = opt.controllers;
  if (controllers.empty()) controllers.push_back(base.sim.controller);
  const bool multi = controllers.size() > 1;

  struct Output {
    std::string label;
    std::string csv;
    std::string metrics_text;
    RunMetrics metrics;
  };
  std::vector<Output> outputs;
  for (auto c : controllers) {
    Scenario s = base;
    s.sim.controller = c;
    if (multi) s.label = base.label + "_" + to_string(c);
    try {
      const MechanicalSystem sys = s.build();
      Trajectory traj = integrate(sys, s.gains, s.dead_zone, s.sim);
      traj.label = s.label;
      Output o;
      o.label = s.label;
      std::ostringstream csv;
      write_trajectory_csv(traj, csv);
      o.csv = csv.str();
      o.metrics = compute_metrics(traj, s.gains.q_star);
      if (multi) o.metrics.case_name = base.label;
      o.metrics_text = format_metrics(o.metrics);
      outputs.push_back(std::move(o));
    } catch (const SimulationAborted& e) {
      err << "error: " << s.label << ": " << e.what() << "\n";
      return kAborted;
    } catch (const std::exception& e) {
      err << "error: " << s.label << ": " << e.what() << "\n";
      return kInvalid;
    }
  }

  try {
    fs::create_directories(output_dir);
    for (const auto& o : outputs) {
      write_file_atomic(fs::path(output_dir) / (o.label + ".csv"), o.csv);
      write_file_atomic(fs::path(output_dir) / (o.label + ".metrics.txt"), o.metrics_text);
      out << o.label << ": steady-state error " << error_pair(o.metrics) << " ("
          << o.metrics.normalization << ", " << o.metrics.wiring << " wiring), settled="
          << (o.metrics.settled ? "true" : "false") << "\n";
    }
    if (multi) {
      std::vector<std::string> header = {"Case", "Position"};
      std::vector<std::string> row = {base.label, position_string(base.gains.q_star)};
      for (const auto& o : outputs) {
        header.push_back("u_" + o.metrics.controller + "(%L1/%L2)");
        row.push_back(error_pair(o.metrics));
      }
      std::string table = render_table(header, {row});
      table += "normalization=" + std::string(kNormalization) +
               " wiring=" + to_string(base.sim.wiring) + "\n";
      write_file_atomic(fs::path(output_dir) / (base.label + ".comparison.txt"), table);
      out << table;
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kIo;
  }
  return kOk;
}

// ---------------------------------------------------------------------------
// analyze

struct AnalysisResult {
  TuningReport tuning;
  double alpha = 1.0;
  double similarity_error = 0.0;  // eig(N) vs eig(-A)
};

inline AnalysisResult analyze(const MechanicalSystem& sys, const PbcGains& gains) {
  AnalysisResult r;
  r.tuning = tuning_check(sys, gains);
  r.alpha = r.tuning.dissipation_scaling();
  const VectorXcd lin = Eigen::EigenSolver<MatrixXd>(-linearize(sys, gains), false).eigenvalues();
  r.similarity_error = spectrum_distance(r.tuning.spectrum, lin);
  return r;
}

inline std::string format_analysis(const std::string& label, const AnalysisResult& r) {
  const TuningReport& t = r.tuning;
  std::ostringstream os;
  os << "label=" << label << "\n"
     << "mass_evaluated_at=" << join(t.q_star) << "\n"
     << "lhs=" << format_number(t.lhs) << "\n"
     << "rhs=" << format_number(t.rhs) << "\n"
     << "satisfied=" << (t.satisfied ? "true" : "false") << "\n"
     << "dissipation_scaling=" << format_number(r.alpha) << "\n"
     << "spectral_radius=" << format_number(t.spectral_radius) << "\n"
     << "max_im=" << format_number(t.max_im) << "\n"
     << "min_re=" << format_number(t.min_re) << "\n"
     << "real_spectrum=" << (t.real_spectrum ? "true" : "false") << "\n"
     << "similarity_error=" << format_number(r.similarity_error) << "\n";
  for (Eigen::Index k = 0; k < t.spectrum.size(); ++k) {
    const auto& res = t.residuals[static_cast<std::size_t>(k)];
    os << "eig_" << k + 1 << "=" << format_number(t.spectrum(k).real()) << ","
       << format_number(t.spectrum(k).imag()) << "\n"
       << "residual_" << k + 1 << "=" << (res ? format_number(*res) : std::string("degenerate"))
       << "\n";
  }
  return os.str();
}

inline std::string analysis_csv(const AnalysisResult& r) {
  const TuningReport& t = r.tuning;
  return render_csv({"lhs", "rhs", "satisfied", "max_im", "min_re"},
                    {{format_number(t.lhs), format_number(t.rhs), t.satisfied ? "true" : "false",
                      format_number(t.max_im), format_number(t.min_re)}});
}

inline int cmd_analyze(const std::string& path, const std::optional<std::string>& output_dir,
                       std::ostream& out, std::ostream& err) {
  Scenario s;
  AnalysisResult r;
  try {
    s = load_scenario(path);
    const MechanicalSystem sys = s.build();
    r = analyze(sys, s.gains);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kInvalid;
  }
  const std::string text = format_analysis(s.label, r);
  const std::string csv = analysis_csv(r);
  out << text << "\n" << csv;
  if (output_dir) {
    try {
      fs::create_directories(*output_dir);
      write_file_atomic(fs::path(*output_dir) / (s.label + ".analysis.txt"), text);
      write_file_atomic(fs::path(*output_dir) / (s.label + ".analysis.csv"), csv);
    } catch (const std::exception& e) {
      err << "error: " << e.what() << "\n";
      return kIo;
    }
  }
  return kOk;
}

// ---------------------------------------------------------------------------
// report

struct ReportTables {
  std::string text;
  std::string csv;
  std::vector<std::string> warnings;
};

inline ReportTables build_report(const std::string& suite_dir) {
  std::map<std::string, std::optional<RunMetrics>> by_label;
  std::vector<std::string> warnings;
  for (const auto& entry : fs::directory_iterator(suite_dir)) {
    if (!entry.is_regular_file()) continue;
    const std::string name = entry.path().filename().string();
    const std::string metrics_suffix = ".metrics.txt";
    if (name.size() > metrics_suffix.size() &&
        name.compare(name.size() - metrics_suffix.size(), metrics_suffix.size(), metrics_suffix) == 0) {
      const std::string label = name.substr(0, name.size() - metrics_suffix.size());
      std::ifstream in(entry.path());
      std::ostringstream os;
      os << in.rdbuf();
      try {
        by_label[label] = parse_metrics(os.str());
      } catch (const std::exception& e) {
        warnings.push_back(label + ": unreadable metrics (" + e.what() + ")");
        by_label.try_emplace(label);
      }
    } else if (entry.path().extension() == ".csv" && name != "report.csv" &&
               name.find(".analysis.") == std::string::npos) {
      by_label.try_emplace(name.substr(0, name.size() - 4));
    }
  }
  if (by_label.empty()) throw std::runtime_error(suite_dir + ": no metrics files found");
  for (const auto& [label, m] : by_label)
    if (!m) warnings.push_back(label + ": metrics file missing");

  // Group runs of the same case under different controllers.
  std::map<std::string, std::map<std::string, std::optional<RunMetrics>>> cases;
  std::set<std::string> controllers;
  for (const auto& [label, m] : by_label) {
    const std::string case_name = m ? m->case_name : case_from_label(label);
    std::string controller = m ? m->controller : "";
    if (!m) {
      const std::string tail = label.substr(std::min(label.size(), case_name.size() + 1));
      controller = label == case_name ? "pidz" : tail;
    }
    controllers.insert(controller);
    cases[case_name][controller] = m;
  }
  bool comparison = false;
  for (const auto& [name, runs] : cases)
    if (runs.size() > 1) comparison = true;

  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::set<std::string> wirings;
  if (comparison) {
    std::vector<std::string> order;
    for (const char* c : {"pi", "pidz", "none"})
      if (controllers.count(c)) order.push_back(c);
    header = {"Case", "Position"};
    for (const auto& c : order) header.push_back("u_" + c + "(%L1/%L2)");
    for (const auto& [name, runs] : cases) {
      std::string position = kMissingCell;
      for (const auto& [c, m] : runs)
        if (m) position = position_string(m->q_star);
      std::vector<std::string> row = {name, position};
      for (const auto& c : order) {
        const auto it = runs.find(c);
        if (it == runs.end() || !it->second) {
          row.push_back(kMissingCell);
        } else {
          row.push_back(error_pair(*it->second));
          wirings.insert(it->second->wiring);
        }
      }
      rows.push_back(std::move(row));
    }
  } else {
    header = {"Case", "%Link1", "%Link2"};
    for (const auto& [name, runs] : cases) {
      const auto& m = runs.begin()->second;
      if (!m) {
        rows.push_back({name, kMissingCell, kMissingCell});
        continue;
      }
      wirings.insert(m->wiring);
      std::vector<std::string> row = {name};
      for (double e : m->steady_state_error) row.push_back(format_fixed(e, 2));
      while (row.size() < header.size()) row.push_back(kMissingCell);
      rows.push_back(std::move(row));
    }
  }

  ReportTables r;
  r.text = render_table(header, rows);
  std::string w;
  for (const auto& s : wirings) w += (w.empty() ? "" : ",") + s;
  r.text += "normalization=" + std::string(kNormalization) + " wiring=" + w + "\n";
  r.csv = render_csv(header, rows);
  r.warnings = std::move(warnings);
  return r;
}

inline int cmd_report(const std::string& suite_dir, std::ostream& out, std::ostream& err) {
  ReportTables r;
  try {
    if (!fs::is_directory(suite_dir)) throw std::runtime_error(suite_dir + ": not a directory");
    r = build_report(suite_dir);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kInvalid;
  }
  for (const auto& w : r.warnings) err << "warning: " << w << "\n";
  try {
    write_file_atomic(fs::path(suite_dir) / "report.txt", r.text);
    write_file_atomic(fs::path(suite_dir) / "report.csv", r.csv);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kIo;
  }
  out << r.text;
  return kOk;
}

// ---------------------------------------------------------------------------
// export-suite

inline int cmd_export_suite(const std::string& dir, std::ostream& out, std::ostream& err) {
  try {
    fs::create_directories(dir);
    for (const Scenario& s : table_suites()) {
      const fs::path p = fs::path(dir) / (s.label + ".json");
      write_file_atomic(p, dump_scenario(s));
      out << p.string() << "\n";
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kIo;
  }
  return kOk;
}

}  // namespace pidz::cli

#include "nhpp/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "nhpp/error.hpp"

namespace nhpp::io {

namespace {

std::ifstream open_in(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  return in;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, sep)) out.push_back(trim(cell));
  return out;
}

double parse_double(const std::string& text, const fs::path& path, std::size_t line) {
  double v = 0.0;
  const char* first = text.data();
  const char* last = first + text.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc{} || ptr != last) {
    throw IoError(path.string() + ":" + std::to_string(line) + ": cannot parse '" + text +
                  "' as a number");
  }
  return v;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

std::string read_text(const fs::path& path) {
  auto in = open_in(path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

nlohmann::json read_json(const fs::path& path) {
  const std::string text = read_text(path);
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw IoError("invalid JSON in '" + path.string() + "': " + e.what());
  }
}

void write_json(const fs::path& path, const nlohmann::json& value) {
  write_text(path, value.dump(2) + "\n");
}

PointPattern read_pattern_csv(const fs::path& path, const Region& region) {
  auto in = open_in(path);
  std::string line;
  std::size_t number = 0;
  bool header = false;
  std::vector<Point> points;
  while (std::getline(in, line)) {
    ++number;
    line = trim(line);
    if (line.empty()) continue;
    const auto cells = split(line, ',');
    if (!header) {
      if (cells.size() != 2 || cells[0] != "x" || cells[1] != "y") {
        throw IoError(path.string() + ": expected header 'x,y'");
      }
      header = true;
      continue;
    }
    if (cells.size() != 2) {
      throw IoError(path.string() + ":" + std::to_string(number) + ": expected two columns");
    }
    points.push_back({parse_double(cells[0], path, number), parse_double(cells[1], path, number)});
  }
  if (!header) throw IoError(path.string() + ": missing header 'x,y'");
  return PointPattern(std::move(points), region);
}

void write_pattern_csv(const fs::path& path, const PointPattern& pattern) {
  std::string text = "x,y\n";
  for (const auto& s : pattern.points()) {
    text += format_double(s.x) + "," + format_double(s.y) + "\n";
  }
  write_text(path, text);
}

Raster read_raster(const fs::path& path) {
  auto in = open_in(path);
  std::string line;
  if (!std::getline(in, line)) throw IoError(path.string() + ": empty raster file");
  std::istringstream head(line);
  int nx = 0;
  int ny = 0;
  double xmin = 0;
  double xmax = 0;
  double ymin = 0;
  double ymax = 0;
  if (!(head >> nx >> ny >> xmin >> xmax >> ymin >> ymax)) {
    throw IoError(path.string() + ": raster header must be 'nx ny xmin xmax ymin ymax'");
  }
  std::vector<double> values;
  std::string token;
  std::size_t number = 1;
  while (std::getline(in, line)) {
    ++number;
    std::istringstream is(line);
    while (is >> token) values.push_back(parse_double(token, path, number));
  }
  try {
    return Raster(QuadratureGrid(Region(xmin, xmax, ymin, ymax), nx, ny), std::move(values));
  } catch (const ConfigError& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

void write_raster(const fs::path& path, const Raster& raster) {
  const auto& r = raster.layout.region();
  std::string text = std::to_string(raster.layout.nx()) + " " +
                     std::to_string(raster.layout.ny()) + " " + format_double(r.xmin()) + " " +
                     format_double(r.xmax()) + " " + format_double(r.ymin()) + " " +
                     format_double(r.ymax()) + "\n";
  const auto nx = static_cast<std::size_t>(raster.layout.nx());
  for (std::size_t i = 0; i < raster.values.size(); ++i) {
    text += format_double(raster.values[i]);
    text += (i + 1) % nx == 0 ? '\n' : ' ';
  }
  write_text(path, text);
}

void write_chain_csv(const fs::path& path, const Chain& chain) {
  std::string text = "iter";
  for (const auto& name : chain.parameter_names()) text += "," + name;
  text += "\n";
  for (std::size_t b = 0; b < chain.n_kept(); ++b) {
    const auto& t = chain.samples[b];
    text += std::to_string(b < chain.iterations.size() ? chain.iterations[b] : b + 1);
    text += "," + format_double(t.lambda0);
    for (double v : t.beta) text += "," + format_double(v);
    text += "\n";
  }
  write_text(path, text);
}

Chain read_chain_csv(const fs::path& path) {
  auto in = open_in(path);
  std::string line;
  if (!std::getline(in, line)) throw IoError(path.string() + ": empty chain file");
  const auto head = split(trim(line), ',');
  if (head.size() < 2 || head[0] != "iter" || head[1] != "lambda0") {
    throw IoError(path.string() + ": chain header must start with 'iter,lambda0'");
  }
  std::vector<std::size_t> covariates;
  for (std::size_t c = 2; c < head.size(); ++c) {
    if (head[c].rfind("beta_", 0) != 0) {
      throw IoError(path.string() + ": unexpected chain column '" + head[c] + "'");
    }
    const int j = std::stoi(head[c].substr(5));
    if (j < 1) throw IoError(path.string() + ": covariate indices are 1-based");
    covariates.push_back(static_cast<std::size_t>(j - 1));
  }
  Chain chain;
  chain.spec = ModelSpec(covariates);
  std::size_t number = 1;
  while (std::getline(in, line)) {
    ++number;
    line = trim(line);
    if (line.empty()) continue;
    const auto cells = split(line, ',');
    if (cells.size() != head.size()) {
      throw IoError(path.string() + ":" + std::to_string(number) + ": wrong number of columns");
    }
    chain.iterations.push_back(static_cast<int>(parse_double(cells[0], path, number)));
    Theta t;
    t.lambda0 = parse_double(cells[1], path, number);
    for (std::size_t c = 2; c < cells.size(); ++c) t.beta.push_back(parse_double(cells[c], path, number));
    chain.samples.push_back(std::move(t));
  }
  return chain;
}

nlohmann::json to_json(const PosteriorSummary& summary) {
  nlohmann::json params = nlohmann::json::array();
  for (const auto& p : summary.parameters) {
    params.push_back({{"name", p.name},
                      {"mean", p.mean},
                      {"sd", p.sd},
                      {"hpd", {p.hpd_lower, p.hpd_upper}},
                      {"ess", p.ess}});
  }
  return {{"level", summary.level}, {"parameters", params}};
}

nlohmann::json criteria_json(const std::string& model, const DicResult& dic,
                             const LpmlResult& lpml,
                             const std::optional<std::string>& event_terms_file) {
  nlohmann::json j = {{"model", model},
                      {"dic", dic.dic},
                      {"p_d", dic.p_d},
                      {"mean_dev", dic.mean_dev},
                      {"dev_at_mean", dic.dev_at_mean},
                      {"lpml", lpml.lpml},
                      {"integral_term", lpml.integral_term}};
  if (event_terms_file) j["event_terms_file"] = *event_terms_file;
  return j;
}

nlohmann::json to_json(const SelectionReport& report) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : report.rows) {
    nlohmann::json row = {{"model", r.model.label()}, {"failed", r.failed}};
    if (r.failed) {
      row["error"] = r.error;
    } else {
      row.update(criteria_json(r.model.label(), r.dic, r.lpml));
      row["acceptance"] = r.acceptance;
      if (r.summary) row["summary"] = to_json(*r.summary);
      if (!r.warnings.empty()) row["warnings"] = r.warnings;
    }
    rows.push_back(row);
  }
  nlohmann::json j = {{"rows", rows}};
  j["winner_dic"] = report.winner_dic ? nlohmann::json(report.rows[*report.winner_dic].model.label())
                                      : nlohmann::json(nullptr);
  j["winner_lpml"] = report.winner_lpml
                         ? nlohmann::json(report.rows[*report.winner_lpml].model.label())
                         : nlohmann::json(nullptr);
  return j;
}

nlohmann::json to_json(const StudyReport& report) {
  nlohmann::json reps = nlohmann::json::array();
  for (const auto& r : report.replicates) {
    nlohmann::json rep = {{"index", r.index},
                          {"seed", r.seed},
                          {"n_points", r.n_points},
                          {"failed", r.failed}};
    if (r.failed) {
      rep["error"] = r.error;
    } else {
      rep["dic"] = r.dic;
      rep["lpml"] = r.lpml;
      rep["p_d"] = r.p_d;
      rep["winner_dic"] = report.rows[r.winner_dic].label;
      rep["winner_lpml"] = report.rows[r.winner_lpml].label;
    }
    reps.push_back(rep);
  }
  nlohmann::json models = nlohmann::json::array();
  for (const auto& row : report.rows) models.push_back(row.label);
  return {{"title", report.title},
          {"models", models},
          {"reference", report.rows.empty() ? "" : report.rows[report.reference].label},
          {"n_excluded", report.n_excluded},
          {"mean_count", report.mean_count},
          {"replicates", reps}};
}

namespace {

std::string quote(const std::string& s) {
  if (s.find_first_of(",\"") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::string selection_csv(const SelectionReport& report) {
  std::string text = "model,dic,p_d,lpml\n";
  for (const auto& r : report.rows) {
    text += quote(r.model.label()) + ",";
    if (r.failed) {
      text += "NA,NA,NA\n";
    } else {
      text += format_double(r.dic.dic) + "," + format_double(r.dic.p_d) + "," +
              format_double(r.lpml.lpml) + "\n";
    }
  }
  return text;
}

std::string study_csv(const StudyReport& report) {
  std::string text = "model,avg_dic,avg_lpml,dic_sel_pct,lpml_sel_pct\n";
  for (const auto& r : report.rows) {
    text += quote(r.label) + "," + format_double(r.avg_dic) + "," + format_double(r.avg_lpml) +
            "," + format_double(r.dic_sel_pct) + "," + format_double(r.lpml_sel_pct) + "\n";
  }
  return text;
}

std::string study_differences_csv(const StudyReport& report) {
  std::string text =
      "model,dic_diff_median,dic_diff_q1,dic_diff_q3,lpml_diff_median,lpml_diff_q1,lpml_diff_q3\n";
  for (const auto& r : report.rows) {
    text += quote(r.label) + "," + format_double(r.dic_diff.median) + "," +
            format_double(r.dic_diff.q1) + "," + format_double(r.dic_diff.q3) + "," +
            format_double(r.lpml_diff.median) + "," + format_double(r.lpml_diff.q1) + "," +
            format_double(r.lpml_diff.q3) + "\n";
  }
  return text;
}

std::string oracle_csv(std::span<const OracleRow> rows) {
  std::string text = "n,oracle,lpml,abs_diff\n";
  for (const auto& r : rows) {
    text += std::to_string(r.n) + "," + format_double(r.oracle) + "," + format_double(r.lpml) +
            "," + format_double(r.abs_diff) + "\n";
  }
  return text;
}

}  // namespace nhpp::io

#include "brace/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

namespace brace::io {
namespace {

bool needs_quotes(const std::string& s) {
  return s.find_first_of(",\"\r\n") != std::string::npos;
}

std::string quote(const std::string& s) {
  if (!needs_quotes(s)) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text, const std::string& origin) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    if (c == '"') {
      in_quotes = true;
      field_started = true;
    } else if (c == ',') {
      record.push_back(std::move(field));
      field.clear();
      field_started = true;
    } else if (c == '\n' || c == '\r') {
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      if (field_started || !field.empty() || !record.empty()) {
        record.push_back(std::move(field));
        records.push_back(std::move(record));
      }
      record.clear();
      field.clear();
      field_started = false;
    } else {
      field += c;
      field_started = true;
    }
  }
  if (in_quotes) throw IoError(origin + ": unterminated quoted field");
  if (field_started || !field.empty() || !record.empty()) {
    record.push_back(std::move(field));
    records.push_back(std::move(record));
  }
  return records;
}

}  // namespace

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc()) throw IoError("failed to format double");
  return std::string(buf, ptr);
}

double parse_double(const std::string& text, const std::string& context) {
  std::size_t begin = 0;
  std::size_t end = text.size();
  while (begin < end && std::isspace(static_cast<unsigned char>(text[begin]))) ++begin;
  while (end > begin && std::isspace(static_cast<unsigned char>(text[end - 1]))) --end;
  if (begin < end && text[begin] == '+') ++begin;
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(text.data() + begin, text.data() + end, value);
  if (ec != std::errc() || ptr != text.data() + end || begin == end) {
    throw IoError(context + ": cannot parse '" + text + "' as a number");
  }
  return value;
}

CsvTable read_csv(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  auto records = parse_csv(buffer.str(), path.string());
  if (records.empty()) throw IoError(path.string() + ": empty file");
  CsvTable table;
  table.header = std::move(records.front());
  for (std::size_t r = 1; r < records.size(); ++r) {
    if (records[r].size() != table.header.size()) {
      throw IoError(path.string() + ": row " + std::to_string(r) + " has " +
                    std::to_string(records[r].size()) + " fields, header has " +
                    std::to_string(table.header.size()));
    }
    table.rows.push_back(std::move(records[r]));
  }
  return table;
}

void write_csv(const fs::path& path, const CsvTable& table) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  auto write_row = [&](const std::vector<std::string>& row) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << quote(row[i]);
    out << '\n';
  };
  write_row(table.header);
  for (const auto& row : table.rows) write_row(row);
  if (!out) throw IoError("failed writing " + path.string());
}

SampleTable read_sample_table(const fs::path& path) {
  const CsvTable csv = read_csv(path);
  if (csv.header.size() < 2) throw IoError(path.string() + ": needs an id column and data");
  SampleTable t;
  t.columns.assign(csv.header.begin() + 1, csv.header.end());
  t.values.resize(static_cast<Index>(csv.rows.size()), static_cast<Index>(t.columns.size()));
  for (std::size_t r = 0; r < csv.rows.size(); ++r) {
    t.sample_ids.push_back(csv.rows[r][0]);
    for (std::size_t c = 1; c < csv.rows[r].size(); ++c) {
      t.values(static_cast<Index>(r), static_cast<Index>(c - 1)) =
          parse_double(csv.rows[r][c], path.string() + " row " + std::to_string(r + 1));
    }
  }
  return t;
}

void write_sample_table(const fs::path& path, const SampleTable& table) {
  CsvTable csv;
  csv.header.push_back("sample_id");
  csv.header.insert(csv.header.end(), table.columns.begin(), table.columns.end());
  for (Index r = 0; r < table.values.rows(); ++r) {
    std::vector<std::string> row{table.sample_ids[r]};
    for (Index c = 0; c < table.values.cols(); ++c) row.push_back(format_double(table.values(r, c)));
    csv.rows.push_back(std::move(row));
  }
  write_csv(path, csv);
}

Vector read_response(const fs::path& path, const std::vector<std::string>& sample_ids,
                     const std::string& column) {
  const SampleTable t = read_sample_table(path);
  Index col = 0;
  if (column.empty()) {
    if (t.columns.size() != 1) {
      throw IoError(path.string() + ": expected exactly one response column");
    }
  } else {
    auto it = std::find(t.columns.begin(), t.columns.end(), column);
    if (it == t.columns.end()) throw IoError(path.string() + ": no column named '" + column + "'");
    col = it - t.columns.begin();
  }
  std::map<std::string, double> by_id;
  for (std::size_t r = 0; r < t.sample_ids.size(); ++r) {
    by_id[t.sample_ids[r]] = t.values(static_cast<Index>(r), col);
  }
  Vector y(static_cast<Index>(sample_ids.size()));
  for (std::size_t i = 0; i < sample_ids.size(); ++i) {
    auto it = by_id.find(sample_ids[i]);
    if (it == by_id.end()) {
      throw IoError(path.string() + ": no response for sample '" + sample_ids[i] + "'");
    }
    y[static_cast<Index>(i)] = it->second;
  }
  return y;
}

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

void write_json(const fs::path& path, const json& value) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << value.dump(2) << '\n';
  if (!out) throw IoError("failed writing " + path.string());
}

void write_trace(const fs::path& dir, const ChainTrace& trace) {
  const Index S = trace.size();
  const Index p = trace.p();
  std::vector<std::string> names = trace.feature_names;
  if (static_cast<Index>(names.size()) != p) {
    names.clear();
    for (Index j = 0; j < p; ++j) names.push_back("f" + std::to_string(j + 1));
  }
  CsvTable beta, z, scalars;
  beta.header.push_back("iteration");
  beta.header.insert(beta.header.end(), names.begin(), names.end());
  z.header = beta.header;
  scalars.header = {"iteration", "sigma2", "gamma2", "alpha", "K", "log_marginal"};
  for (Index s = 0; s < S; ++s) {
    const std::string it = std::to_string(trace.iteration[s]);
    std::vector<std::string> brow{it}, zrow{it};
    for (Index j = 0; j < p; ++j) {
      brow.push_back(format_double(trace.beta(s, j)));
      zrow.push_back(std::to_string(trace.z(s, j)));
    }
    beta.rows.push_back(std::move(brow));
    z.rows.push_back(std::move(zrow));
    scalars.rows.push_back({it, format_double(trace.sigma2[s]), format_double(trace.gamma2[s]),
                            format_double(trace.alpha[s]), std::to_string(trace.K[s]),
                            format_double(trace.log_marginal[s])});
  }
  write_csv(dir / "beta.csv", beta);
  write_csv(dir / "z.csv", z);
  write_csv(dir / "scalars.csv", scalars);
}

ChainTrace read_trace(const fs::path& dir) {
  const CsvTable beta = read_csv(dir / "beta.csv");
  const CsvTable z = read_csv(dir / "z.csv");
  if (beta.header != z.header || beta.rows.size() != z.rows.size()) {
    throw IoError(dir.string() + ": beta.csv and z.csv disagree in shape");
  }
  ChainTrace trace;
  const auto S = static_cast<Index>(beta.rows.size());
  const auto p = static_cast<Index>(beta.header.size()) - 1;
  trace.feature_names.assign(beta.header.begin() + 1, beta.header.end());
  trace.resize(S, p);
  for (Index s = 0; s < S; ++s) {
    const std::string where = dir.string() + " sample " + std::to_string(s + 1);
    trace.iteration[s] = static_cast<int>(parse_double(beta.rows[s][0], where));
    for (Index j = 0; j < p; ++j) {
      trace.beta(s, j) = parse_double(beta.rows[s][j + 1], where);
      trace.z(s, j) = static_cast<int>(parse_double(z.rows[s][j + 1], where));
    }
  }
  if (fs::exists(dir / "scalars.csv")) {
    const CsvTable scalars = read_csv(dir / "scalars.csv");
    if (static_cast<Index>(scalars.rows.size()) == S) {
      for (Index s = 0; s < S; ++s) {
        const auto& row = scalars.rows[s];
        const std::string where = dir.string() + "/scalars.csv row " + std::to_string(s + 1);
        trace.sigma2[s] = parse_double(row.at(1), where);
        trace.gamma2[s] = parse_double(row.at(2), where);
        trace.alpha[s] = parse_double(row.at(3), where);
        trace.K[s] = static_cast<int>(parse_double(row.at(4), where));
        trace.log_marginal[s] = parse_double(row.at(5), where);
      }
    }
  }
  return trace;
}

json to_json(const Hyperparams& hp) {
  return json{{"a_sigma", hp.a_sigma}, {"b_sigma", hp.b_sigma}, {"a_gamma", hp.a_gamma},
              {"b_gamma", hp.b_gamma}, {"a_alpha", hp.a_alpha}, {"b_alpha", hp.b_alpha},
              {"alpha0", hp.alpha0}};
}

Hyperparams hyperparams_from_json(const json& j, Hyperparams base) {
  base.a_sigma = j.value("a_sigma", base.a_sigma);
  base.b_sigma = j.value("b_sigma", base.b_sigma);
  base.a_gamma = j.value("a_gamma", base.a_gamma);
  base.b_gamma = j.value("b_gamma", base.b_gamma);
  base.a_alpha = j.value("a_alpha", base.a_alpha);
  base.b_alpha = j.value("b_alpha", base.b_alpha);
  base.alpha0 = j.value("alpha0", base.alpha0);
  return base;
}

json to_json(const ChainConfig& cfg) {
  return json{{"iters", cfg.n_iter},
              {"burnin", cfg.burn_in},
              {"thin", cfg.thin},
              {"seed", cfg.seed},
              {"init_clusters", cfg.init_clusters},
              {"random_sweep", cfg.random_sweep},
              {"strategy", to_string(cfg.strategy)},
              {"gram_max_p", cfg.gram_max_p}};
}

json to_json(const SimConfig& cfg) {
  return json{{"n", cfg.n},       {"p", cfg.p},     {"case", to_string(cfg.cov_case)},
              {"rho", cfg.rho},   {"snr", cfg.snr}, {"seed", cfg.seed},
              {"train_fraction", cfg.train_fraction}};
}

json to_json(const SimulationTruth& truth, const SimConfig& cfg) {
  return json{{"beta_true", std::vector<double>(truth.beta_true.data(),
                                                truth.beta_true.data() + truth.beta_true.size())},
              {"partition_true", truth.partition_true},
              {"sigma_true", truth.sigma_true},
              {"case", to_string(truth.cov_case)},
              {"rho", truth.rho},
              {"config", to_json(cfg)}};
}

json to_json(const PosteriorSummary& summary, const std::vector<std::string>& names) {
  const auto to_vec = [](const Vector& v) {
    return std::vector<double>(v.data(), v.data() + v.size());
  };
  std::vector<std::string> selected_names;
  std::vector<int> selected_flags;
  for (std::size_t j = 0; j < summary.selected.size(); ++j) {
    selected_flags.push_back(summary.selected[j] ? 1 : 0);
    if (summary.selected[j]) selected_names.push_back(names.at(j));
  }
  int clusters = 0;
  for (int l : summary.point_partition) clusters = std::max(clusters, l);
  return json{{"level", summary.level},
              {"feature_names", names},
              {"beta_mean", to_vec(summary.beta_mean)},
              {"ci_lower", to_vec(summary.ci_lower)},
              {"ci_upper", to_vec(summary.ci_upper)},
              {"inclusion_prob", to_vec(summary.inclusion_prob)},
              {"selected", selected_flags},
              {"selected_features", selected_names},
              {"partition", summary.point_partition},
              {"nonzero_clusters", clusters}};
}

json to_json(const EvalReport& report) {
  return json{{"pe", report.pe}, {"l2", report.l2}, {"fp", report.fp}, {"fn", report.fn},
              {"ari", report.ari}};
}

void write_summary_table(const fs::path& path, const PosteriorSummary& summary,
                         const std::vector<std::string>& names) {
  const Index p = summary.beta_mean.size();
  std::vector<Index> order(static_cast<std::size_t>(p));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
    return std::abs(summary.beta_mean[a]) > std::abs(summary.beta_mean[b]);
  });
  CsvTable csv;
  csv.header = {"name",           "beta_mean",     "ci_lower", "ci_upper",
                "inclusion_prob", "cluster_label", "selected"};
  for (Index j : order) {
    const int label = summary.point_partition.empty() ? 0 : summary.point_partition[j];
    csv.rows.push_back({names.at(j), format_double(summary.beta_mean[j]),
                        format_double(summary.ci_lower[j]), format_double(summary.ci_upper[j]),
                        format_double(summary.inclusion_prob[j]), std::to_string(label),
                        summary.selected[j] ? "1" : "0"});
  }
  write_csv(path, csv);
}

}  // namespace brace::io

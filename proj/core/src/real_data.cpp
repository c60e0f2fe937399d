#include "elicit/real_data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <string>
#include <unordered_map>
#include <unordered_set>

#include "elicit/cross_validation.hpp"
#include "elicit/csv.hpp"
#include "elicit/errors.hpp"
#include "elicit/lasso.hpp"

namespace elicit {

namespace {

std::string location(const std::string& path, std::size_t line_number) {
  return path + ":" + std::to_string(line_number);
}

/// Reads one line, dropping a trailing carriage return.
bool next_line(std::ifstream& in, std::string& line) {
  if (!std::getline(in, line)) return false;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return true;
}

} // namespace

std::optional<Eigen::Index> ExpressionTable::row_index(
    const std::string& cell_line) const {
  for (std::size_t i = 0; i < cell_lines.size(); ++i)
    if (cell_lines[i] == cell_line) return static_cast<Eigen::Index>(i);
  return std::nullopt;
}

ExpressionTable load_expression(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open expression file: " + path);

  std::string line;
  std::size_t line_number = 1;
  if (!next_line(in, line))
    throw IoError(location(path, line_number) + ": missing header");
  const std::vector<std::string> header = split_csv_line(line);
  if (header.size() < 2 || header[0] != "cell_line")
    throw IoError(location(path, line_number) +
                  ": header must be cell_line,<gene ids>");

  ExpressionTable table;
  table.gene_ids.assign(header.begin() + 1, header.end());
  {
    std::unordered_set<std::string> seen;
    for (const std::string& id : table.gene_ids)
      if (!seen.insert(id).second)
        throw IoError(location(path, line_number) + ": duplicate gene id " + id);
  }

  bool raw_scale = false;
  std::vector<std::vector<double>> rows;
  std::unordered_set<std::string> seen_cells;
  bool first_data_line = true;
  while (next_line(in, line)) {
    ++line_number;
    if (line.empty()) continue;
    if (line[0] == '#') {
      if (!first_data_line)
        throw IoError(location(path, line_number) +
                      ": scale declaration must follow the header");
      if (line == "#scale=raw")
        raw_scale = true;
      else if (line == "#scale=log2")
        raw_scale = false;
      else
        throw IoError(location(path, line_number) +
                      ": unknown declaration, expected #scale=raw or #scale=log2");
      continue;
    }
    first_data_line = false;
    const std::vector<std::string> fields = split_csv_line(line);
    if (fields.size() != header.size())
      throw IoError(location(path, line_number) + ": expected " +
                    std::to_string(header.size()) + " fields, got " +
                    std::to_string(fields.size()));
    if (!seen_cells.insert(fields[0]).second)
      throw IoError(location(path, line_number) + ": duplicate cell line " +
                    fields[0]);
    table.cell_lines.push_back(fields[0]);
    std::vector<double> row(table.gene_ids.size());
    for (std::size_t j = 0; j < row.size(); ++j) {
      double v = parse_double(fields[j + 1], location(path, line_number));
      if (raw_scale) {
        if (v < 0.0)
          throw IoError(location(path, line_number) +
                        ": negative raw count " + fields[j + 1]);
        v = std::log2(v + 1.0);
      }
      row[j] = v;
    }
    rows.push_back(std::move(row));
  }

  table.values.resize(static_cast<Eigen::Index>(rows.size()),
                      static_cast<Eigen::Index>(table.gene_ids.size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j)
      table.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          rows[i][j];
  return table;
}

std::vector<std::string> ResponseTable::drugs() const {
  std::set<std::string> out;
  for (const ResponseRecord& r : records) out.insert(r.drug);
  return {out.begin(), out.end()};
}

std::vector<std::string> ResponseTable::cells_for(const std::string& drug) const {
  std::set<std::string> out;
  for (const ResponseRecord& r : records)
    if (r.drug == drug) out.insert(r.cell_line);
  return {out.begin(), out.end()};
}

std::optional<double> ResponseTable::response(const std::string& drug,
                                              const std::string& cell_line) const {
  for (const ResponseRecord& r : records)
    if (r.drug == drug && r.cell_line == cell_line) return r.log_ic50;
  return std::nullopt;
}

ResponseTable load_responses(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open response file: " + path);

  std::string line;
  std::size_t line_number = 1;
  if (!next_line(in, line))
    throw IoError(location(path, line_number) + ": missing header");
  if (line != "cell_line,drug,log_ic50")
    throw IoError(location(path, line_number) +
                  ": header must be cell_line,drug,log_ic50");

  ResponseTable table;
  std::set<std::pair<std::string, std::string>> seen;
  while (next_line(in, line)) {
    ++line_number;
    if (line.empty()) continue;
    const std::vector<std::string> fields = split_csv_line(line);
    if (fields.size() != 3)
      throw IoError(location(path, line_number) + ": expected 3 fields, got " +
                    std::to_string(fields.size()));
    if (!seen.insert({fields[0], fields[1]}).second)
      throw IoError(location(path, line_number) + ": duplicate response for (" +
                    fields[0] + ", " + fields[1] + ")");
    table.records.push_back(
        {fields[0], fields[1],
         parse_double(fields[2], location(path, line_number))});
  }
  return table;
}

std::vector<std::string> load_gene_filter(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open gene filter: " + path);
  std::vector<std::string> ids;
  std::string line;
  while (next_line(in, line))
    if (!line.empty()) ids.push_back(line);
  return ids;
}

ExpressionTable filter_genes(const ExpressionTable& table,
                             const std::vector<std::string>& gene_ids) {
  const std::unordered_set<std::string> wanted(gene_ids.begin(), gene_ids.end());
  for (const std::string& id : wanted)
    if (std::find(table.gene_ids.begin(), table.gene_ids.end(), id) ==
        table.gene_ids.end())
      throw ValidationError("gene id not in expression table: " + id);

  ExpressionTable out;
  out.cell_lines = table.cell_lines;
  std::vector<Eigen::Index> keep;
  for (std::size_t j = 0; j < table.gene_ids.size(); ++j)
    if (wanted.count(table.gene_ids[j])) {
      out.gene_ids.push_back(table.gene_ids[j]);
      keep.push_back(static_cast<Eigen::Index>(j));
    }
  out.values.resize(table.values.rows(),
                    static_cast<Eigen::Index>(keep.size()));
  for (std::size_t j = 0; j < keep.size(); ++j)
    out.values.col(static_cast<Eigen::Index>(j)) = table.values.col(keep[j]);
  return out;
}

PgtLearnResult learn_pseudo_ground_truth(const ExpressionTable& expression,
                                         const ResponseTable& responses,
                                         const std::string& drug,
                                         const std::string& held_out_cell,
                                         std::uint64_t seed, int folds,
                                         int grid_size) {
  const std::vector<std::string> cells = responses.cells_for(drug);
  if (cells.empty()) throw ValidationError("no responses for drug: " + drug);

  PgtLearnResult result;
  std::vector<Eigen::Index> rows;
  std::vector<double> values;
  for (const std::string& cell : cells) {
    if (cell == held_out_cell) continue;
    const auto row = expression.row_index(cell);
    if (!row) {
      result.skipped_cells.push_back(cell);
      continue;
    }
    result.used_cells.push_back(cell);
    rows.push_back(*row);
    values.push_back(*responses.response(drug, cell));
  }
  if (result.used_cells.size() < 12)
    throw ValidationError("drug " + drug + " has only " +
                          std::to_string(result.used_cells.size()) +
                          " usable training cells; need at least 12");

  Dataset data;
  data.features.resize(static_cast<Eigen::Index>(rows.size()),
                       expression.values.cols());
  data.responses.resize(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    data.features.row(static_cast<Eigen::Index>(i)) =
        expression.values.row(rows[i]);
    data.responses(static_cast<Eigen::Index>(i)) = values[i];
  }
  const double center = data.responses.mean();
  data.responses.array() -= center;

  const CvResult cv =
      cv_select_lambda(data, 1.0, folds, grid_size, seed, true);
  LassoConfig config;
  config.alpha = 1.0;
  config.lambda = cv.lambda_min;
  config.standardize = true;
  const LassoFit fit = fit_lasso(data, config);

  result.entry.theta = fit.weights.weights;
  result.entry.lambda_min = cv.lambda_min;
  result.entry.center = center;
  return result;
}

std::string drug_cache_filename(const std::string& drug) {
  std::string name;
  name.reserve(drug.size() + 4);
  for (const char c : drug) {
    const bool ok = (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') ||
                    (c >= '0' && c <= '9') || c == '.' || c == '_' || c == '-';
    name.push_back(ok ? c : '_');
  }
  return name + ".csv";
}

void save_pgt_table(const std::string& path,
                    const std::vector<std::string>& gene_ids,
                    const DrugPgt& table) {
  for (const auto& [cell, entry] : table)
    if (entry.theta.size() != static_cast<Eigen::Index>(gene_ids.size()))
      throw ValidationError("theta length for " + cell +
                            " does not match the gene list");

  std::ofstream out(path);
  if (!out) throw IoError("cannot write cache file: " + path);
  out << "cell_line,lambda_min,center";
  for (const std::string& id : gene_ids) out << ',' << id;
  out << '\n';
  for (const auto& [cell, entry] : table) {
    out << cell << ',' << format_double(entry.lambda_min) << ','
        << format_double(entry.center);
    for (Eigen::Index j = 0; j < entry.theta.size(); ++j)
      out << ',' << format_double(entry.theta(j));
    out << '\n';
  }
  if (!out) throw IoError("write failed: " + path);
}

DrugPgt load_pgt_table(const std::string& path,
                       const std::vector<std::string>& expected_gene_ids) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open cache file: " + path);

  std::string line;
  std::size_t line_number = 1;
  if (!next_line(in, line))
    throw IoError(location(path, line_number) + ": missing header");
  const std::vector<std::string> header = split_csv_line(line);
  if (header.size() < 3 || header[0] != "cell_line" ||
      header[1] != "lambda_min" || header[2] != "center")
    throw IoError(location(path, line_number) +
                  ": header must be cell_line,lambda_min,center,<gene ids>");
  if (header.size() - 3 != expected_gene_ids.size() ||
      !std::equal(header.begin() + 3, header.end(), expected_gene_ids.begin()))
    throw IoError(path + ": cached gene ids do not match the expression table;"
                  " rebuild the cache");

  DrugPgt table;
  while (next_line(in, line)) {
    ++line_number;
    if (line.empty()) continue;
    const std::vector<std::string> fields = split_csv_line(line);
    if (fields.size() != header.size())
      throw IoError(location(path, line_number) + ": expected " +
                    std::to_string(header.size()) + " fields, got " +
                    std::to_string(fields.size()));
    PgtEntry entry;
    entry.lambda_min = parse_double(fields[1], location(path, line_number));
    entry.center = parse_double(fields[2], location(path, line_number));
    entry.theta.resize(static_cast<Eigen::Index>(fields.size()) - 3);
    for (std::size_t j = 3; j < fields.size(); ++j)
      entry.theta(static_cast<Eigen::Index>(j) - 3) =
          parse_double(fields[j], location(path, line_number));
    if (!table.emplace(fields[0], std::move(entry)).second)
      throw IoError(location(path, line_number) + ": duplicate cell line " +
                    fields[0]);
  }
  return table;
}

RealTargetCase build_target_case(const ExpressionTable& expression,
                                 const std::string& drug,
                                 const std::string& cell_line,
                                 const PgtEntry& entry) {
  const auto row = expression.row_index(cell_line);
  if (!row)
    throw ValidationError("cell line not in expression table: " + cell_line);
  if (entry.theta.size() != expression.values.cols())
    throw ValidationError("cached theta length does not match the table");

  RealTargetCase out;
  out.drug = drug;
  out.cell_line = cell_line;
  out.target.x_star = expression.values.row(*row);
  out.target.theta_star = entry.theta;
  out.center = entry.center;
  out.lambda_min = entry.lambda_min;
  out.target.validate();
  return out;
}

} // namespace elicit

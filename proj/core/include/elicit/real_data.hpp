#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "elicit/elicitation.hpp"
#include "elicit/types.hpp"

namespace elicit {

/// Gene expression matrix, cell lines by genes, on log2 scale.
struct ExpressionTable {
  std::vector<std::string> cell_lines;
  std::vector<std::string> gene_ids;
  Eigen::MatrixXd values;

  std::optional<Eigen::Index> row_index(const std::string& cell_line) const;
};

/// Loads `cell_line,<gene_id>,...` with one row per cell line. A comment
/// line `#scale=raw` or `#scale=log2` may follow the header; raw values are
/// mapped through log2(v + 1), log2 (the default) is taken as is. Duplicate
/// cell lines or gene ids are errors, as is any malformed field, reported
/// with its line number.
ExpressionTable load_expression(const std::string& path);

struct ResponseRecord {
  std::string cell_line;
  std::string drug;
  double log_ic50 = 0.0;
};

struct ResponseTable {
  std::vector<ResponseRecord> records;

  /// Distinct drugs, sorted.
  std::vector<std::string> drugs() const;
  /// Distinct cell lines with a response for the drug, sorted.
  std::vector<std::string> cells_for(const std::string& drug) const;
  std::optional<double> response(const std::string& drug,
                                 const std::string& cell_line) const;
};

/// Loads `cell_line,drug,log_ic50`. A duplicate (cell_line, drug) pair is an
/// error; a header-only file is a valid empty table.
ResponseTable load_responses(const std::string& path);

/// One gene id per line; blank lines are skipped.
std::vector<std::string> load_gene_filter(const std::string& path);

/// Restricts the table to the listed genes, keeping the table's column
/// order. An id missing from the table is an error.
ExpressionTable filter_genes(const ExpressionTable& table,
                             const std::vector<std::string>& gene_ids);

/// Proxy coefficient vector for one (drug, held-out cell) pair: the sparse
/// fit, the penalty cross-validation picked, and the response mean that was
/// subtracted before fitting.
struct PgtEntry {
  Eigen::VectorXd theta;
  double lambda_min = 0.0;
  double center = 0.0;
};

struct PgtLearnResult {
  PgtEntry entry;
  /// Training cell lines, in the order their rows were stacked.
  std::vector<std::string> used_cells;
  /// Cells with a response for the drug but no expression row.
  std::vector<std::string> skipped_cells;
};

/// Learns the proxy coefficients for one drug with one cell line excluded:
/// centered responses, cross-validated l1 penalty, standardized columns.
/// Requires at least 12 usable training cells.
PgtLearnResult learn_pseudo_ground_truth(const ExpressionTable& expression,
                                         const ResponseTable& responses,
                                         const std::string& drug,
                                         const std::string& held_out_cell,
                                         std::uint64_t seed, int folds = 10,
                                         int grid_size = 100);

/// Proxy coefficients for one drug, keyed by the held-out cell line.
using DrugPgt = std::map<std::string, PgtEntry>;

/// File name a drug's cache is stored under: the id with every character
/// outside [A-Za-z0-9._-] replaced by '_', plus ".csv". Callers writing
/// several drugs into one directory must watch for collisions.
std::string drug_cache_filename(const std::string& drug);

/// Per-drug cache file: header `cell_line,lambda_min,center,<gene_id>,...`,
/// one row per held-out cell. Numbers survive a save/load cycle bit-exactly.
void save_pgt_table(const std::string& path,
                    const std::vector<std::string>& gene_ids,
                    const DrugPgt& table);
DrugPgt load_pgt_table(const std::string& path,
                       const std::vector<std::string>& expected_gene_ids);

/// A target prediction task extracted from the tables: predict the held-out
/// cell's response to the drug, scored against the proxy coefficients.
struct RealTargetCase {
  std::string drug;
  std::string cell_line;
  TargetCase target;
  double center = 0.0;
  double lambda_min = 0.0;
};

RealTargetCase build_target_case(const ExpressionTable& expression,
                                 const std::string& drug,
                                 const std::string& cell_line,
                                 const PgtEntry& entry);

} // namespace elicit

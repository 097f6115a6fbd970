#pragma once

// Experiment CSV input and deterministic number formatting.
//
// Input: a header row naming the columns, then one arm per row. Recognized
// columns are experiment_id (optional), arm_id, n, and either successes or
// mean and std_err. Blank lines and lines starting with '#' are skipped.
// The first data row fixes the row schema for the whole file.

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "ebshrink/error.hpp"
#include "ebshrink/estimator.hpp"

namespace ebshrink {

class ParseError : public InvalidInput {
 public:
  ParseError(std::size_t line, const std::string& what);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

enum class RowSchema { Counts, Summary };

const char* to_string(RowSchema s);

struct Experiment {
  std::string id;
  RowSchema schema = RowSchema::Summary;
  std::vector<ArmSummary> arms;
};

// Experiments in order of first appearance. Rows without an experiment_id
// column belong to `default_id`.
std::vector<Experiment> read_experiments(std::istream& in, std::string_view default_id = "experiment");
std::vector<Experiment> read_experiments_file(const std::filesystem::path& path);

// Writes arm_id,n,mean,std_err rows for one experiment.
void write_summaries(std::ostream& out, const std::vector<ArmSummary>& arms);

// Shortest-form decimal with 12 significant digits, ties to even. Integers
// below 1e12 print without exponent; NaN prints as "nan".
std::string format_number(double v);

// The double nearest to format_number(v).
double quantize(double v);

// RFC 4180 quoting when needed.
std::string csv_field(std::string_view s);

}  // namespace ebshrink

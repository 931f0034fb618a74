#pragma once

#include <string>
#include <vector>

#include "qivar/dataset.hpp"

namespace qivar {

// Minimal RFC-4180 style table: header row required, quoted fields with
// doubled-quote escapes, embedded separators/newlines inside quotes.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    int column(const std::string& name) const;  // -1 when absent
};

CsvTable read_csv(const std::string& path);
CsvTable parse_csv(const std::string& text);

// Builds a validated Dataset from a parsed table: one column is the
// outcome, one the hospital label, every remaining column a numeric
// covariate (header order preserved).
Dataset dataset_from_csv(const CsvTable& table, const std::string& outcome_column,
                         const std::string& hospital_column,
                         std::optional<OutcomeKind> declared_kind = std::nullopt);

// Deterministic numeric formatting for output files (%.17g round-trip).
std::string format_double(double v);
std::string csv_quote(const std::string& field);

}  // namespace qivar

#include "qivar/csv.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "qivar/errors.hpp"

namespace qivar {

int CsvTable::column(const std::string& name) const {
    for (std::size_t j = 0; j < header.size(); ++j) {
        if (header[j] == name) return static_cast<int>(j);
    }
    return -1;
}

CsvTable parse_csv(const std::string& text) {
    std::vector<std::vector<std::string>> records;
    std::vector<std::string> record;
    std::string field;
    bool in_quotes = false;
    bool field_started = false;

    auto end_field = [&] {
        record.push_back(field);
        field.clear();
        field_started = false;
    };
    auto end_record = [&] {
        end_field();
        records.push_back(record);
        record.clear();
    };

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
        } else if (c == '"' && !field_started) {
            in_quotes = true;
            field_started = true;
        } else if (c == ',') {
            end_field();
        } else if (c == '\r') {
            // swallow; CRLF handled at '\n'
        } else if (c == '\n') {
            end_record();
        } else {
            field += c;
            field_started = true;
        }
    }
    if (in_quotes) throw data_error("unterminated quoted field in CSV input");
    if (field_started || !record.empty()) end_record();

    if (records.empty()) throw data_error("CSV input has no header row");
    CsvTable table;
    table.header = records.front();
    for (std::size_t r = 1; r < records.size(); ++r) {
        if (records[r].size() == 1 && records[r][0].empty()) continue;  // blank line
        if (records[r].size() != table.header.size()) {
            std::ostringstream msg;
            msg << "CSV row " << r + 1 << " has " << records[r].size()
                << " fields, header has " << table.header.size();
            throw data_error(msg.str());
        }
        table.rows.push_back(records[r]);
    }
    return table;
}

CsvTable read_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw data_error("cannot open input file: " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_csv(buffer.str());
}

namespace {

double parse_numeric(const std::string& s, const std::string& column, std::size_t row) {
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (s.empty() || end != s.c_str() + s.size()) {
        std::ostringstream msg;
        msg << "non-numeric value '" << s << "' in column '" << column << "', data row "
            << row + 1;
        throw data_error(msg.str());
    }
    return v;
}

}  // namespace

Dataset dataset_from_csv(const CsvTable& table, const std::string& outcome_column,
                         const std::string& hospital_column,
                         std::optional<OutcomeKind> declared_kind) {
    const int yi = table.column(outcome_column);
    if (yi < 0) throw config_error("outcome column '" + outcome_column + "' not found");
    const int zi = table.column(hospital_column);
    if (zi < 0) throw config_error("hospital column '" + hospital_column + "' not found");
    if (yi == zi) throw config_error("outcome and hospital columns must differ");

    std::vector<int> covariate_cols;
    std::vector<std::string> covariate_names;
    for (std::size_t j = 0; j < table.header.size(); ++j) {
        if (static_cast<int>(j) == yi || static_cast<int>(j) == zi) continue;
        covariate_cols.push_back(static_cast<int>(j));
        covariate_names.push_back(table.header[j]);
    }

    const auto n = static_cast<Eigen::Index>(table.rows.size());
    Eigen::VectorXd outcome(n);
    std::vector<std::string> hospitals;
    hospitals.reserve(table.rows.size());
    Eigen::MatrixXd covariates(n, static_cast<Eigen::Index>(covariate_cols.size()));
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& row = table.rows[static_cast<std::size_t>(i)];
        outcome[i] = parse_numeric(row[static_cast<std::size_t>(yi)], outcome_column,
                                   static_cast<std::size_t>(i));
        hospitals.push_back(row[static_cast<std::size_t>(zi)]);
        for (std::size_t k = 0; k < covariate_cols.size(); ++k) {
            covariates(i, static_cast<Eigen::Index>(k)) =
                parse_numeric(row[static_cast<std::size_t>(covariate_cols[k])],
                              covariate_names[k], static_cast<std::size_t>(i));
        }
    }
    return validate(outcome, hospitals, covariates, std::move(covariate_names),
                    declared_kind);
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string csv_quote(const std::string& field) {
    if (field.find_first_of(",\"\n\r") == std::string::npos) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += '"';
    return out;
}

}  // namespace qivar

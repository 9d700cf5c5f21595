#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mixval/sampler.hpp"

namespace mixval {

/// Shortest decimal text that parses back to the same double.
std::string format_double(double v);

double parse_double(const std::string& text);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

/// 16 hex digits of FNV-1a over the file bytes.
std::string hash_hex(const std::string& bytes);

/// A header line of names plus rows of numbers.
struct CsvTable {
    std::vector<std::string> header;
    MatrixXd values;

    /// Index of a named column, or -1.
    Index column(const std::string& name) const;
};

CsvTable parse_csv(const std::string& text);
std::string format_csv(const CsvTable& table);

/// Dataset CSV: header x1,...,xd,y.
Dataset read_dataset_csv(const std::string& path);
std::string dataset_csv(const Dataset& data);

/// Numeric matrix with a header row, e.g. a tabulated design.
MatrixXd read_matrix_csv(const std::string& path);
std::string matrix_csv(const MatrixXd& M, const std::vector<std::string>& header);

/// iter,theta_1..theta_p,lambda,alpha,k,gamma,m,delta_1..delta_n,zeta_1..zeta_n
std::string draws_csv(const PosteriorDraws& draws);
PosteriorDraws parse_draws_csv(const std::string& text);

/// Splits "1,2,3" (commas or whitespace) into numbers.
std::vector<double> parse_number_list(const std::string& text);

}  // namespace mixval

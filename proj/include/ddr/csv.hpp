#pragma once

#include <string>

#include "ddr/data.hpp"

namespace ddr {

// Strict numeric CSV: mandatory header row, comma delimiter, '.' decimal
// point. Every non-outcome / non-weight column becomes a covariate, in header
// order.
NonprobSample load_nonprob_csv(const std::string& path, const std::string& outcome_col);
ProbSample load_prob_csv(const std::string& path, const std::string& weight_col);

// Writers serialize doubles with enough digits to round-trip bit-exactly.
void write_nonprob_csv(const NonprobSample& a, const std::string& path,
                       const std::string& outcome_col = "y");
void write_prob_csv(const ProbSample& b, const std::string& path,
                    const std::string& weight_col = "d");

std::string format_double(double v);

}  // namespace ddr

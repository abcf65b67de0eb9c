#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "mirtlink/items.hpp"
#include "mirtlink/responses.hpp"
#include "mirtlink/transform.hpp"

namespace mirtlink {

// Shortest round-trip decimal text for a double (std::to_chars).  All file
// formats use this so that write -> read -> write is byte-identical.
std::string format_double(double x);
double parse_double(const std::string& token, const std::string& context);
long parse_long(const std::string& token, const std::string& context);

// Item bank CSV.  Fixed header:
//   id,format,model_family,K,a1,a2,a3,d,c,delta1,delta2,delta3,delta4,anchor
// Unused slope/delta cells are empty.  K is the number of categories (2 for
// MC).  anchor is 0/1.
std::string bank_to_csv(const TestForm& form);
TestForm bank_from_csv(const std::string& text, const std::string& name);

void write_bank_csv(const std::filesystem::path& path, const TestForm& form);
TestForm read_bank_csv(const std::filesystem::path& path);

// Response CSV: header row of item ids, then one row per examinee; blank
// cell = missing.
std::string responses_to_csv(const ResponseMatrix& m);
ResponseMatrix responses_from_csv(const std::string& text);

void write_responses_csv(const std::filesystem::path& path, const ResponseMatrix& m);
ResponseMatrix read_responses_csv(const std::filesystem::path& path);

// Calibration output: the bank CSV followed by a '#population' block with
// mean and covariance rows.
std::string calibration_to_csv(const TestForm& form, const Population& pop);
std::pair<TestForm, Population> calibration_from_csv(const std::string& text,
                                                     const std::string& name);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

std::vector<std::string> split_csv_line(const std::string& line);

}  // namespace mirtlink

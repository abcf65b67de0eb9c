#include "mirtlink/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace mirtlink {

std::string format_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& token, const std::string& context) {
  double value = 0.0;
  const char* first = token.data();
  const char* last = token.data() + token.size();
  const auto res = std::from_chars(first, last, value);
  if (res.ec != std::errc{} || res.ptr != last)
    throw std::invalid_argument(context + ": cannot parse number '" + token + "'");
  return value;
}

long parse_long(const std::string& token, const std::string& context) {
  long value = 0;
  const char* first = token.data();
  const char* last = token.data() + token.size();
  const auto res = std::from_chars(first, last, value);
  if (res.ec != std::errc{} || res.ptr != last)
    throw std::invalid_argument(context + ": cannot parse integer '" + token + "'");
  return value;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  for (char ch : line) {
    if (ch == ',') {
      cells.push_back(cell);
      cell.clear();
    } else if (ch != '\r') {
      cell += ch;
    }
  }
  cells.push_back(cell);
  return cells;
}

namespace {

constexpr int kMaxCategories = 5;
const char* kBankHeader = "id,format,model_family,K,a1,a2,a3,d,c,delta1,delta2,delta3,delta4,anchor";

void check_id(const std::string& id) {
  if (id.empty()) throw std::invalid_argument("bank csv: empty item id");
  for (char ch : id)
    if (ch == ',' || ch == '\n' || ch == '\r')
      throw std::invalid_argument("bank csv: item id contains a delimiter: '" + id + "'");
}

std::string slope_cell(const std::vector<double>& a, int k) {
  if (k >= static_cast<int>(a.size())) return "";
  return format_double(a[k]);
}

}  // namespace

std::string bank_to_csv(const TestForm& form) {
  std::string out(kBankHeader);
  out += "\n";
  for (const Item& it : form.items) {
    check_id(item_id(it));
    out += item_id(it);
    out += ",";
    out += to_string(item_format(it));
    out += ",";
    out += to_string(item_family(it));
    out += ",";
    out += std::to_string(n_categories(it));
    const auto& a = item_slopes(it);
    for (int k = 0; k < 3; ++k) {
      out += ",";
      out += slope_cell(a, k);
    }
    if (const auto* di = std::get_if<DichotomousItem>(&it)) {
      out += "," + format_double(di->d) + "," + format_double(di->c) + ",,,,";
    } else {
      const auto& pi = std::get<PolytomousItem>(it);
      if (n_categories(it) > kMaxCategories)
        throw std::invalid_argument("bank csv: more than " +
                                    std::to_string(kMaxCategories) + " categories: " +
                                    item_id(it));
      out += ",,";
      for (int k = 0; k < kMaxCategories - 1; ++k) {
        out += ",";
        if (k < static_cast<int>(pi.deltas.size())) out += format_double(pi.deltas[k]);
      }
    }
    out += item_anchor(it) ? ",1" : ",0";
    out += "\n";
  }
  return out;
}

TestForm bank_from_csv(const std::string& text, const std::string& name) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("bank csv: empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kBankHeader)
    throw std::invalid_argument("bank csv: unexpected header '" + line + "'");
  TestForm form;
  form.name = name;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto cells = split_csv_line(line);
    const std::string where = "bank csv line " + std::to_string(line_no);
    if (cells.size() != 14)
      throw std::invalid_argument(where + ": expected 14 cells, got " +
                                  std::to_string(cells.size()));
    const std::string& id = cells[0];
    const ItemFormat format = item_format_from_string(cells[1]);
    const ModelFamily family = model_family_from_string(cells[2]);
    const int K = static_cast<int>(parse_long(cells[3], where + " K"));
    std::vector<double> a(family_dim(family), 0.0);
    for (int k = 0; k < 3; ++k) {
      if (cells[4 + k].empty()) continue;
      if (k >= static_cast<int>(a.size()))
        throw std::invalid_argument(where + ": slope a" + std::to_string(k + 1) +
                                    " set beyond family dimension");
      a[k] = parse_double(cells[4 + k], where + " a" + std::to_string(k + 1));
    }
    Item item;
    if (K == 2) {
      DichotomousItem di;
      di.id = id;
      di.format = format;
      di.family = family;
      di.a = std::move(a);
      di.d = parse_double(cells[7], where + " d");
      di.c = cells[8].empty() ? 0.0 : parse_double(cells[8], where + " c");
      di.anchor = cells[13] == "1";
      item = std::move(di);
    } else {
      PolytomousItem pi;
      pi.id = id;
      pi.format = format;
      pi.family = family;
      pi.a = std::move(a);
      for (int k = 0; k < K - 1; ++k) {
        if (cells[9 + k].empty())
          throw std::invalid_argument(where + ": missing delta" + std::to_string(k + 1));
        pi.deltas.push_back(parse_double(cells[9 + k], where + " delta"));
      }
      pi.anchor = cells[13] == "1";
      item = std::move(pi);
    }
    validate_item(item);
    form.items.push_back(std::move(item));
  }
  validate_form(form);
  return form;
}

std::string responses_to_csv(const ResponseMatrix& m) {
  check_shape(m);
  std::string out;
  for (std::size_t j = 0; j < m.item_ids.size(); ++j) {
    if (j) out += ",";
    check_id(m.item_ids[j]);
    out += m.item_ids[j];
  }
  out += "\n";
  for (int i = 0; i < m.n_persons; ++i) {
    for (int j = 0; j < m.n_items(); ++j) {
      if (j) out += ",";
      const auto score = m(i, j);
      if (score != ResponseMatrix::kMissing) out += std::to_string(score);
    }
    out += "\n";
  }
  return out;
}

ResponseMatrix responses_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("response csv: empty file");
  ResponseMatrix m;
  m.item_ids = split_csv_line(line);
  if (m.item_ids.size() == 1 && m.item_ids[0].empty())
    throw std::invalid_argument("response csv: empty header");
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != m.item_ids.size())
      throw std::invalid_argument("response csv line " + std::to_string(line_no) +
                                  ": cell count mismatch");
    for (const std::string& cell : cells) {
      if (cell.empty()) {
        m.scores.push_back(ResponseMatrix::kMissing);
        continue;
      }
      const long v = parse_long(cell, "response csv line " + std::to_string(line_no));
      if (v < 0 || v > 32000)
        throw std::invalid_argument("response csv line " + std::to_string(line_no) +
                                    ": score out of range");
      m.scores.push_back(static_cast<std::int16_t>(v));
    }
    ++m.n_persons;
  }
  return m;
}

std::string calibration_to_csv(const TestForm& form, const Population& pop) {
  std::string out = bank_to_csv(form);
  out += "#population\n";
  out += "mean";
  for (double v : pop.mean) out += "," + format_double(v);
  out += "\n";
  for (int r = 0; r < pop.cov.rows; ++r) {
    out += "cov";
    for (int c = 0; c < pop.cov.cols; ++c) out += "," + format_double(pop.cov(r, c));
    out += "\n";
  }
  return out;
}

std::pair<TestForm, Population> calibration_from_csv(const std::string& text,
                                                     const std::string& name) {
  const auto split = text.find("#population\n");
  if (split == std::string::npos)
    throw std::invalid_argument("calibration csv: missing #population block");
  TestForm form = bank_from_csv(text.substr(0, split), name);
  Population pop;
  std::istringstream in(text.substr(split + 12));
  std::string line;
  std::vector<std::vector<double>> cov_rows;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    auto cells = split_csv_line(line);
    if (cells[0] == "mean") {
      for (std::size_t k = 1; k < cells.size(); ++k)
        pop.mean.push_back(parse_double(cells[k], "calibration csv mean"));
    } else if (cells[0] == "cov") {
      std::vector<double> row;
      for (std::size_t k = 1; k < cells.size(); ++k)
        row.push_back(parse_double(cells[k], "calibration csv cov"));
      cov_rows.push_back(std::move(row));
    } else {
      throw std::invalid_argument("calibration csv: unknown population row '" + cells[0] +
                                  "'");
    }
  }
  const int d = static_cast<int>(pop.mean.size());
  if (d == 0) throw std::invalid_argument("calibration csv: missing mean row");
  if (static_cast<int>(cov_rows.size()) != d)
    throw std::invalid_argument("calibration csv: covariance row count mismatch");
  pop.cov = Matrix(d, d);
  for (int r = 0; r < d; ++r) {
    if (static_cast<int>(cov_rows[r].size()) != d)
      throw std::invalid_argument("calibration csv: covariance column count mismatch");
    for (int c = 0; c < d; ++c) pop.cov(r, c) = cov_rows[r][c];
  }
  validate_population(pop);
  return {std::move(form), std::move(pop)};
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open for reading: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return std::move(buf).str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

void write_bank_csv(const std::filesystem::path& path, const TestForm& form) {
  write_text_file(path, bank_to_csv(form));
}

TestForm read_bank_csv(const std::filesystem::path& path) {
  return bank_from_csv(read_text_file(path), path.stem().string());
}

void write_responses_csv(const std::filesystem::path& path, const ResponseMatrix& m) {
  write_text_file(path, responses_to_csv(m));
}

ResponseMatrix read_responses_csv(const std::filesystem::path& path) {
  return responses_from_csv(read_text_file(path));
}

}  // namespace mirtlink

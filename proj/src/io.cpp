#include "tensorscale/io.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <utility>
#include <vector>

#include "tensorscale/errors.hpp"
#include "tensorscale/subtensors.hpp"

namespace tensorscale {

namespace {

struct LineReader {
  std::istream& in;
  int line_no = 0;

  // Fills tokens with the next non-blank, non-comment line; false at EOF.
  bool next(std::vector<std::string>& tokens) {
    std::string line;
    while (std::getline(in, line)) {
      ++line_no;
      const auto first = line.find_first_not_of(" \t\r");
      if (first == std::string::npos || line[first] == '#') continue;
      tokens.clear();
      std::istringstream split(line);
      std::string tok;
      while (split >> tok) tokens.push_back(tok);
      return true;
    }
    return false;
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError("line " + std::to_string(line_no) + ": " + what);
  }
};

long long parse_int(const LineReader& reader, const std::string& tok) {
  errno = 0;
  char* end = nullptr;
  const long long v = std::strtoll(tok.c_str(), &end, 10);
  if (end == tok.c_str() || *end != '\0' || errno == ERANGE)
    reader.fail("expected an integer, got \"" + tok + "\"");
  return v;
}

double parse_double(const LineReader& reader, const std::string& tok) {
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(tok.c_str(), &end);
  if (end == tok.c_str() || *end != '\0')
    reader.fail("expected a number, got \"" + tok + "\"");
  return v;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot open " + path + " for writing");
  return out;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  return in;
}

}  // namespace

std::string format_value(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

SparseTensor read_tensor(std::istream& in) {
  LineReader reader{in};
  std::vector<std::string> tokens;
  if (!reader.next(tokens)) throw ParseError("empty tensor input");

  const long long d = parse_int(reader, tokens[0]);
  if (d < 1 || d > kMaxOrder)
    reader.fail("order must be between 1 and " + std::to_string(kMaxOrder));
  if (tokens.size() != static_cast<std::size_t>(d) + 2)
    reader.fail("header must read \"d n_1 ... n_d nnz\"");

  Shape shape(static_cast<std::size_t>(d));
  for (long long m = 0; m < d; ++m) {
    const long long n = parse_int(reader, tokens[static_cast<std::size_t>(m) + 1]);
    if (n < 1) reader.fail("mode sizes must be positive");
    shape[static_cast<std::size_t>(m)] = static_cast<int>(n);
  }
  const long long nnz = parse_int(reader, tokens[static_cast<std::size_t>(d) + 1]);
  if (nnz < 0) reader.fail("entry count must be nonnegative");

  std::vector<std::pair<MultiIndex, double>> entries;
  entries.reserve(static_cast<std::size_t>(nnz));
  for (long long e = 0; e < nnz; ++e) {
    if (!reader.next(tokens)) throw ParseError("expected " + std::to_string(nnz) +
                                               " entries, got " + std::to_string(e));
    if (tokens.size() != static_cast<std::size_t>(d) + 1)
      reader.fail("entry must read \"a_1 ... a_d value\"");
    MultiIndex alpha(static_cast<std::size_t>(d));
    for (long long m = 0; m < d; ++m) {
      const long long a = parse_int(reader, tokens[static_cast<std::size_t>(m)]);
      if (a < 1 || a > shape[static_cast<std::size_t>(m)])
        reader.fail("coordinate " + std::to_string(a) + " outside mode " +
                    std::to_string(m + 1));
      alpha[static_cast<std::size_t>(m)] = static_cast<int>(a);
    }
    const double v = parse_double(reader, tokens[static_cast<std::size_t>(d)]);
    if (v == 0.0 || !std::isfinite(v)) reader.fail("entry values must be nonzero and finite");
    entries.emplace_back(std::move(alpha), v);
  }
  if (reader.next(tokens)) reader.fail("unexpected content after the last entry");

  try {
    return SparseTensor(shape, std::move(entries));
  } catch (const Error& e) {
    throw ParseError(e.what());
  }
}

SparseTensor read_tensor_file(const std::string& path) {
  auto in = open_in(path);
  try {
    return read_tensor(in);
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

void write_tensor(std::ostream& out, const SparseTensor& A) {
  out << A.order();
  for (int n : A.shape()) out << ' ' << n;
  out << ' ' << A.nnz() << '\n';
  for (std::size_t e = 0; e < A.nnz(); ++e) {
    for (int m = 0; m < A.order(); ++m) out << A.coord(e, m) << ' ';
    out << format_value(A.values()[e]) << '\n';
  }
}

void write_tensor_file(const std::string& path, const SparseTensor& A) {
  auto out = open_out(path);
  write_tensor(out, A);
}

TargetProducts read_targets(std::istream& in, const Shape& shape) {
  LineReader reader{in};
  std::vector<std::string> tokens;
  if (!reader.next(tokens)) throw ParseError("empty targets input");
  if (tokens.size() != 1) reader.fail("header must hold the subtensor order k alone");
  const long long k = parse_int(reader, tokens[0]);

  try {
    TargetProducts targets(shape, static_cast<int>(k));
    while (reader.next(tokens)) {
      if (tokens.size() != 3) reader.fail("target must read \"family s value\"");
      const long long family = parse_int(reader, tokens[0]);
      const long long s = parse_int(reader, tokens[1]);
      const double value = parse_double(reader, tokens[2]);
      try {
        targets.set({s, static_cast<int>(family)}, value);
      } catch (const Error& e) {
        reader.fail(e.what());
      }
    }
    return targets;
  } catch (const ParseError&) {
    throw;
  } catch (const Error& e) {
    throw ParseError(e.what());
  }
}

TargetProducts read_targets_file(const std::string& path, const Shape& shape) {
  auto in = open_in(path);
  try {
    return read_targets(in, shape);
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

void write_targets(std::ostream& out, const TargetProducts& targets) {
  out << targets.k() << '\n';
  for (int f = 1; f <= targets.family_total(); ++f) {
    for (std::int64_t s = 1; s <= targets.cardinality(f); ++s) {
      const double v = targets.value({s, f});
      if (v != 1.0) out << f << ' ' << s << ' ' << format_value(v) << '\n';
    }
  }
}

void write_targets_file(const std::string& path, const TargetProducts& targets) {
  auto out = open_out(path);
  write_targets(out, targets);
}

ScalingLists read_scalings(std::istream& in, const Shape& shape, int k) {
  const auto families = enumerate_families(shape, k);
  ScalingLists scalings = zero_scalings(shape, k);

  LineReader reader{in};
  std::vector<std::string> tokens;
  for (const auto& fam : families) {
    if (!reader.next(tokens))
      throw ParseError("expected a header for partition family " +
                       std::to_string(fam.family_index));
    if (tokens.size() != static_cast<std::size_t>(k) + 3 || tokens[0] != "family" ||
        tokens[2] != "dims")
      reader.fail("family header must read \"family f dims d_1 ... d_k\"");
    if (parse_int(reader, tokens[1]) != fam.family_index)
      reader.fail("expected partition family " + std::to_string(fam.family_index));
    for (int j = 0; j < k; ++j) {
      if (parse_int(reader, tokens[static_cast<std::size_t>(j) + 3]) !=
          fam.spanned_dims[static_cast<std::size_t>(j)])
        reader.fail("spanned dimensions disagree with the tensor shape for family " +
                    std::to_string(fam.family_index));
    }

    auto& factors = scalings.log_factors[static_cast<std::size_t>(fam.family_index - 1)];
    std::vector<char> seen(static_cast<std::size_t>(fam.cardinality), 0);
    for (std::int64_t r = 0; r < fam.cardinality; ++r) {
      if (!reader.next(tokens))
        throw ParseError("family " + std::to_string(fam.family_index) + " wants " +
                         std::to_string(fam.cardinality) + " multipliers, got " +
                         std::to_string(r));
      if (tokens.size() != 2) reader.fail("multiplier must read \"s value\"");
      const long long s = parse_int(reader, tokens[0]);
      if (s < 1 || s > fam.cardinality) reader.fail("subtensor index outside family");
      if (seen[static_cast<std::size_t>(s - 1)])
        reader.fail("duplicate multiplier for subtensor " + std::to_string(s));
      seen[static_cast<std::size_t>(s - 1)] = 1;
      const double m = parse_double(reader, tokens[1]);
      if (m <= 0.0 || !std::isfinite(m)) reader.fail("multipliers must be positive and finite");
      factors[static_cast<std::size_t>(s - 1)] = std::log(m);
    }
  }
  if (reader.next(tokens)) reader.fail("unexpected content after the last family");
  return scalings;
}

ScalingLists read_scalings_file(const std::string& path, const Shape& shape, int k) {
  auto in = open_in(path);
  try {
    return read_scalings(in, shape, k);
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

void write_scalings(std::ostream& out, const Shape& shape, int k, const ScalingLists& scalings) {
  const auto families = enumerate_families(shape, k);
  if (scalings.log_factors.size() != families.size())
    throw InvalidScalingError("scaling lists do not match the partition families");
  for (const auto& fam : families) {
    const auto& factors = scalings.log_factors[static_cast<std::size_t>(fam.family_index - 1)];
    if (static_cast<std::int64_t>(factors.size()) != fam.cardinality)
      throw InvalidScalingError("scaling list length does not match family cardinality");
    out << "family " << fam.family_index << " dims";
    for (int dim : fam.spanned_dims) out << ' ' << dim;
    out << '\n';
    for (std::int64_t s = 1; s <= fam.cardinality; ++s)
      out << s << ' ' << format_value(std::exp(factors[static_cast<std::size_t>(s - 1)]))
          << '\n';
  }
}

void write_scalings_file(const std::string& path, const Shape& shape, int k,
                         const ScalingLists& scalings) {
  auto out = open_out(path);
  write_scalings(out, shape, k, scalings);
}

}  // namespace tensorscale

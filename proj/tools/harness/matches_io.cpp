#include "harness/matches_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <vector>

namespace cullsac::harness {
namespace {

std::vector<std::string> split(const std::string& line) {
  std::istringstream ss(line);
  std::vector<std::string> out;
  for (std::string tok; ss >> tok;) out.push_back(tok);
  return out;
}

double to_double(const std::string& tok, std::size_t line) {
  double v = 0.0;
  const auto* end = tok.data() + tok.size();
  const auto [ptr, ec] = std::from_chars(tok.data(), end, v);
  if (ec != std::errc() || ptr != end || !std::isfinite(v)) throw ParseError(line, "not a finite number: " + tok);
  return v;
}

std::vector<double> numbers(const std::vector<std::string>& toks, std::size_t from, std::size_t line) {
  std::vector<double> out;
  for (std::size_t i = from; i < toks.size(); ++i) out.push_back(to_double(toks[i], line));
  return out;
}

Aabb2 parse_extent(const std::vector<double>& v, std::size_t line) {
  Aabb2 box;
  if (v.size() == 2) box = Aabb2::from_bounds(0.0, 0.0, v[0], v[1]);
  else if (v.size() == 4) box = Aabb2::from_bounds(v[0], v[1], v[2], v[3]);
  else throw ParseError(line, "extent needs 'w h' or 'x0 y0 x1 y1'");
  if (!(box.width() > 0.0 && box.height() > 0.0)) throw ParseError(line, "empty extent");
  return box;
}

Mat3 parse_intrinsics(const std::vector<double>& v, std::size_t line) {
  if (v.size() != 4) throw ParseError(line, "intrinsics need fx fy cx cy");
  Mat3 K = Mat3::Identity();
  K(0, 0) = v[0];
  K(1, 1) = v[1];
  K(0, 2) = v[2];
  K(1, 2) = v[3];
  return K;
}

// Metadata comments are parsed when they look like a known key and ignored otherwise.
void parse_comment(const std::string& body, std::size_t line, MatchesFile& file) {
  const auto toks = split(body);
  if (toks.empty()) return;
  const std::string& key = toks[0];
  if (key == "family" && toks.size() == 2) {
    try {
      file.family = parse_family(toks[1]);
    } catch (const std::invalid_argument&) {
      throw ParseError(line, "unknown model family " + toks[1]);
    }
  } else if (key == "model") {
    const auto v = numbers(toks, 1, line);
    if (v.size() != 9) throw ParseError(line, "model needs 9 numbers");
    Mat3 m;
    for (int i = 0; i < 9; ++i) m(i / 3, i % 3) = v[static_cast<std::size_t>(i)];
    file.model = m;
  } else if (key == "intrinsics1") {
    file.context.K1 = parse_intrinsics(numbers(toks, 1, line), line);
  } else if (key == "intrinsics2") {
    file.context.K2 = parse_intrinsics(numbers(toks, 1, line), line);
  } else if ((key == "lambda1" || key == "lambda2") && toks.size() == 2) {
    (key == "lambda1" ? file.context.lambda1 : file.context.lambda2) = to_double(toks[1], line);
  }
}

}  // namespace

ParseError::ParseError(std::size_t line, const std::string& what)
    : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ec == std::errc() ? ptr : buf);
}

MatchesFile parse_matches(std::istream& in) {
  MatchesFile file;
  std::string text;
  for (std::size_t line = 1; std::getline(in, text); ++line) {
    if (!text.empty() && text.back() == '\r') text.pop_back();
    const auto first = text.find_first_not_of(" \t");
    if (first == std::string::npos) continue;
    if (text[first] == '#') {
      parse_comment(text.substr(first + 1), line, file);
      continue;
    }
    const auto toks = split(text);
    if (toks[0] == "extent1" || toks[0] == "extent2") {
      const Aabb2 box = parse_extent(numbers(toks, 1, line), line);
      if (toks[0] == "extent1") {
        file.extent_1 = box;
        file.explicit_extent_1 = true;
      } else {
        file.extent_2 = box;
        file.explicit_extent_2 = true;
      }
      continue;
    }
    if (toks.size() != 4 && toks.size() != 5) throw ParseError(line, "expected 4 or 5 fields");
    const auto v = numbers(toks, 0, line);
    Correspondence c;
    c.p = {v[0], v[1]};
    c.q = {v[2], v[3]};
    if (v.size() == 5) {
      if (v[4] < 0.0 || v[4] > 1.0) throw ParseError(line, "score outside [0,1]");
      c.score = v[4];
    }
    file.matches.push_back(c);
  }
  if (!file.explicit_extent_1)
    for (const auto& c : file.matches) file.extent_1.extend(c.p);
  if (!file.explicit_extent_2)
    for (const auto& c : file.matches) file.extent_2.extend(c.q);
  return file;
}

MatchesFile parse_matches_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return parse_matches(in);
}

Mat3 model_matrix(const Model& model) {
  return std::visit(
      [](const auto& m) -> Mat3 {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, FundamentalMatrix>) return m.F;
        else if constexpr (std::is_same_v<T, EssentialSetup>) return m.E;
        else return m.H;
      },
      model);
}

void write_matches(std::ostream& out, const MatchesFile& file) {
  if (file.family) out << "# family " << to_string(*file.family) << '\n';
  if (file.model) {
    out << "# model";
    for (int i = 0; i < 9; ++i) out << ' ' << format_double((*file.model)(i / 3, i % 3));
    out << '\n';
  }
  const auto write_k = [&](const char* key, const Mat3& K) {
    if (K == Mat3::Identity()) return;
    out << "# " << key << ' ' << format_double(K(0, 0)) << ' ' << format_double(K(1, 1)) << ' '
        << format_double(K(0, 2)) << ' ' << format_double(K(1, 2)) << '\n';
  };
  write_k("intrinsics1", file.context.K1);
  write_k("intrinsics2", file.context.K2);
  if (file.context.lambda1 != 0.0) out << "# lambda1 " << format_double(file.context.lambda1) << '\n';
  if (file.context.lambda2 != 0.0) out << "# lambda2 " << format_double(file.context.lambda2) << '\n';
  const auto write_extent = [&](const char* key, const Aabb2& e, bool present) {
    if (!present || e.empty()) return;
    out << key << ' ';
    if (e.min.x() == 0.0 && e.min.y() == 0.0) {
      out << format_double(e.max.x()) << ' ' << format_double(e.max.y()) << '\n';
    } else {
      out << format_double(e.min.x()) << ' ' << format_double(e.min.y()) << ' ' << format_double(e.max.x())
          << ' ' << format_double(e.max.y()) << '\n';
    }
  };
  write_extent("extent1", file.extent_1, file.explicit_extent_1);
  write_extent("extent2", file.extent_2, file.explicit_extent_2);
  for (const auto& c : file.matches) {
    out << format_double(c.p.x()) << ' ' << format_double(c.p.y()) << ' ' << format_double(c.q.x()) << ' '
        << format_double(c.q.y());
    if (c.score) out << ' ' << format_double(*c.score);
    out << '\n';
  }
}

}  // namespace cullsac::harness

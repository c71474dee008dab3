#include "secdot/regen.hpp"

#include <bit>
#include <cstdio>
#include <sstream>

namespace secdot {

namespace {

// Fills leaves [lo, hi) starting at random index r; returns the next index.
std::uint32_t generate(ReScheme& s, std::size_t lo, std::size_t hi, std::uint32_t r) {
  const std::size_t len = hi - lo;
  if (len == 1) {
    s.raw_eX[lo] = {0, r + 1, r, r, r + 1, r + 2};
    s.raw_eY[lo] = {0, r, r + 1, r + 3};
    s.raw_eO[lo].insert(s.raw_eO[lo].end(), {r + 2, r + 3});
    s.raw_eOS[lo].insert(s.raw_eOS[lo].end(), {-1, -1});
    return r + 4;
  }
  // Largest power of two strictly below len.
  const std::size_t half = std::bit_floor(len - 1);
  s.raw_eO[lo].push_back(r);
  s.raw_eOS[lo].push_back(+1);
  s.raw_eO[lo + half].push_back(r);
  s.raw_eOS[lo + half].push_back(-1);
  r += 1;
  r = generate(s, lo, lo + half, r);
  return generate(s, lo + half, hi, r);
}

LeafPlan leaf_from_raw(const ReScheme& s, std::size_t i) {
  const auto& ex = s.raw_eX[i];
  const auto& ey = s.raw_eY[i];
  const auto& eo = s.raw_eO[i];
  const auto& eos = s.raw_eOS[i];
  if (ex.size() != 6 || ey.size() != 4 || eo.size() != eos.size()) {
    fail(ErrorKind::kData, "scheme leaf " + std::to_string(i) + " has malformed index lists");
  }
  LeafPlan leaf;
  leaf.a = ex[2];
  leaf.b = ex[1];
  leaf.c = ex[5];
  leaf.d = ey[3];
  if (ex[0] != 0 || ey[0] != 0 || ex[3] != leaf.a || ex[4] != leaf.b ||
      ey[1] != leaf.a || ey[2] != leaf.b) {
    fail(ErrorKind::kData, "scheme leaf " + std::to_string(i) + " is inconsistent");
  }
  for (std::size_t k = 0; k < eo.size(); ++k) {
    if (eos[k] != 1 && eos[k] != -1) {
      fail(ErrorKind::kData, "scheme leaf " + std::to_string(i) + " has a bad sign");
    }
    leaf.offline.push_back({eo[k], eos[k]});
  }
  return leaf;
}

}  // namespace

ReScheme regen(std::size_t d, std::uint32_t start) {
  if (d == 0) fail(ErrorKind::kDomain, "regen: dot-product length must be at least 1");
  ReScheme s;
  s.d = d;
  s.raw_eX.resize(d);
  s.raw_eY.resize(d);
  s.raw_eO.resize(d);
  s.raw_eOS.resize(d);
  const std::uint32_t end = generate(s, 0, d, start);
  s.total_randoms = end - start;
  s.leaves.reserve(d);
  for (std::size_t i = 0; i < d; ++i) s.leaves.push_back(leaf_from_raw(s, i));
  return s;
}

std::string dump_scheme(const ReScheme& s) {
  std::ostringstream os;
  os << "re-scheme d=" << s.d << " total_randoms=" << s.total_randoms << '\n';
  for (std::size_t i = 0; i < s.d; ++i) {
    os << "leaf " << i << " eX";
    for (auto v : s.raw_eX[i]) os << ' ' << v;
    os << " eY";
    for (auto v : s.raw_eY[i]) os << ' ' << v;
    os << " eO";
    for (auto v : s.raw_eO[i]) os << ' ' << v;
    os << " eOS";
    for (auto v : s.raw_eOS[i]) os << ' ' << (v > 0 ? '+' : '-');
    os << '\n';
  }
  return os.str();
}

ReScheme parse_scheme_dump(const std::string& text) {
  std::istringstream in(text);
  std::string header;
  if (!std::getline(in, header)) fail(ErrorKind::kData, "empty scheme dump");
  ReScheme s;
  if (std::sscanf(header.c_str(), "re-scheme d=%zu total_randoms=%zu", &s.d,
                  &s.total_randoms) != 2) {
    fail(ErrorKind::kData, "bad scheme dump header: " + header);
  }
  s.raw_eX.resize(s.d);
  s.raw_eY.resize(s.d);
  s.raw_eO.resize(s.d);
  s.raw_eOS.resize(s.d);
  std::string line;
  std::size_t seen = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string word;
    std::size_t i = 0;
    ls >> word >> i;
    if (word != "leaf" || i >= s.d) fail(ErrorKind::kData, "bad scheme dump line: " + line);
    std::string section;
    while (ls >> word) {
      if (word == "eX" || word == "eY" || word == "eO" || word == "eOS") {
        section = word;
      } else if (section == "eOS") {
        s.raw_eOS[i].push_back(word == "+" ? 1 : word == "-" ? -1 : 0);
      } else {
        auto v = static_cast<std::uint32_t>(std::stoul(word));
        if (section == "eX") s.raw_eX[i].push_back(v);
        else if (section == "eY") s.raw_eY[i].push_back(v);
        else if (section == "eO") s.raw_eO[i].push_back(v);
        else fail(ErrorKind::kData, "bad scheme dump line: " + line);
      }
    }
    ++seen;
  }
  if (seen != s.d) fail(ErrorKind::kData, "scheme dump has missing leaves");
  for (std::size_t i = 0; i < s.d; ++i) s.leaves.push_back(leaf_from_raw(s, i));
  return s;
}

}  // namespace secdot

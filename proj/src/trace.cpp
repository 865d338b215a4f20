#include "csg/trace.hpp"

#include <istream>
#include <ostream>

#include "csg/error.hpp"

namespace csg {

namespace {

void put_varint(std::ostream& out, std::uint64_t v) {
  while (v >= 0x80) {
    out.put(static_cast<char>((v & 0x7f) | 0x80));
    v >>= 7;
  }
  out.put(static_cast<char>(v));
}

std::uint64_t get_varint(std::istream& in) {
  std::uint64_t v = 0;
  for (int shift = 0; shift < 64; shift += 7) {
    const int c = in.get();
    if (c == EOF) fail(ErrorCode::ParseError, "trace ends inside a varint");
    v |= static_cast<std::uint64_t>(c & 0x7f) << shift;
    if (!(c & 0x80)) return v;
  }
  fail(ErrorCode::ParseError, "varint longer than 64 bits");
}

std::uint64_t zigzag(std::int64_t x) { return (static_cast<std::uint64_t>(x) << 1) ^ static_cast<std::uint64_t>(x >> 63); }
std::int64_t unzigzag(std::uint64_t v) { return static_cast<std::int64_t>(v >> 1) ^ -static_cast<std::int64_t>(v & 1); }

void put_id(std::ostream& out, const StateId& s) {
  put_varint(out, s.size());
  for (auto c : s.coords()) put_varint(out, zigzag(c));
}

StateId get_id(std::istream& in) {
  const std::uint64_t n = get_varint(in);
  if (n > StateId::kMaxCoords) fail(ErrorCode::ParseError, "state id with too many coordinates");
  std::vector<std::int64_t> coords;
  for (std::uint64_t i = 0; i < n; ++i) coords.push_back(unzigzag(get_varint(in)));
  return StateId(std::span<const std::int64_t>(coords));
}

}  // namespace

void write_trace(std::ostream& out, const std::vector<Play>& plays) {
  out.write("CSGT", 4);
  out.put(1);
  put_varint(out, plays.size());
  for (const auto& p : plays) {
    put_id(out, p.initial);
    put_varint(out, p.steps.size());
    out.put(p.sink_reached ? 1 : 0);
    for (const auto& st : p.steps) {
      put_varint(out, st.max_action);
      put_varint(out, st.min_action);
      put_id(out, st.next);
    }
  }
}

std::vector<Play> read_trace(std::istream& in) {
  char magic[4];
  if (!in.read(magic, 4) || std::string(magic, 4) != "CSGT") fail(ErrorCode::ParseError, "not a play trace");
  if (in.get() != 1) fail(ErrorCode::ParseError, "unsupported trace version");
  const std::uint64_t count = get_varint(in);
  std::vector<Play> plays;
  for (std::uint64_t k = 0; k < count; ++k) {
    Play p;
    p.initial = get_id(in);
    const std::uint64_t steps = get_varint(in);
    const int sink = in.get();
    if (sink != 0 && sink != 1) fail(ErrorCode::ParseError, "bad sink flag");
    p.sink_reached = sink == 1;
    StateId cur = p.initial;
    for (std::uint64_t i = 0; i < steps; ++i) {
      PlayStep st;
      st.state = cur;
      st.max_action = static_cast<ActionIndex>(get_varint(in));
      st.min_action = static_cast<ActionIndex>(get_varint(in));
      st.next = get_id(in);
      cur = st.next;
      p.steps.push_back(std::move(st));
    }
    plays.push_back(std::move(p));
  }
  return plays;
}

}  // namespace csg

#include "wcc/coding.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <iterator>

#include "wcc/error.hpp"

namespace wcc {
namespace {

constexpr std::uint64_t kMaxCodable = (std::uint64_t{1} << 63) - 1;

std::uint64_t read_run(BitReader& reader, unsigned width, std::uint32_t alphabet, std::uint8_t& symbol) {
  const std::uint64_t zeros = prefix_decode_nat(reader);
  const std::uint64_t code = reader.read(width);
  if (code + 1 >= alphabet) throw MalformedStream("symbol index outside the alphabet");
  symbol = static_cast<std::uint8_t>(code + 1);
  return zeros;
}

}  // namespace

std::uint64_t RunString::length() const noexcept {
  std::uint64_t total = trailing_zeros;
  for (const auto& r : runs) total += r.zero_run + 1;
  return total;
}

std::vector<std::uint64_t> RunString::digits() const {
  std::vector<std::uint64_t> d;
  d.reserve(runs.size());
  for (const auto& r : runs) d.push_back(r.zero_run);
  return d;
}

RunString run_length(const SymbolString& omega) {
  RunString rs;
  rs.alphabet_size = omega.alphabet_size;
  std::uint64_t zeros = 0;
  for (auto s : omega.symbols) {
    if (s == 0) {
      ++zeros;
    } else {
      rs.runs.push_back({zeros, s});
      zeros = 0;
    }
  }
  rs.trailing_zeros = zeros;
  return rs;
}

SymbolString expand(const RunString& rs) {
  SymbolString out;
  out.alphabet_size = rs.alphabet_size;
  out.symbols.reserve(rs.length());
  for (const auto& r : rs.runs) {
    out.symbols.insert(out.symbols.end(), r.zero_run, 0);
    out.symbols.push_back(r.symbol);
  }
  out.symbols.insert(out.symbols.end(), rs.trailing_zeros, 0);
  return out;
}

void prefix_encode_nat(std::uint64_t v, BitString& out) {
  if (v > kMaxCodable) throw DomainError("value too large for the prefix code");
  const unsigned L = static_cast<unsigned>(std::bit_width(v + 1)) - 1;
  for (unsigned i = 0; i < L; ++i) out.push_back(true);
  out.push_back(false);
  out.append(v - ((std::uint64_t{1} << L) - 1), L);
}

BitString prefix_encode_nat(std::uint64_t v) {
  BitString b;
  prefix_encode_nat(v, b);
  return b;
}

std::uint64_t prefix_decode_nat(BitReader& reader) {
  unsigned L = 0;
  while (reader.read_bit()) {
    if (++L > 63) throw MalformedStream("prefix code longer than 63 payload bits");
  }
  return ((std::uint64_t{1} << L) - 1) + reader.read(L);
}

unsigned symbol_width(std::uint32_t alphabet_size) {
  if (alphabet_size < 2) throw DomainError("alphabet size must be >= 2");
  if (alphabet_size == 2) return 0;
  return static_cast<unsigned>(std::bit_width(alphabet_size - 2));
}

CodedStream encode(const SymbolString& omega) {
  CodedStream cs;
  cs.n = omega.size();
  cs.alphabet_size = omega.alphabet_size;
  prefix_encode_nat(cs.n, cs.bits);
  cs.header_bits = cs.bits.size();
  const unsigned width = symbol_width(omega.alphabet_size);
  std::uint64_t zeros = 0;
  for (auto s : omega.symbols) {
    if (s == 0) {
      ++zeros;
      continue;
    }
    prefix_encode_nat(zeros, cs.bits);
    cs.bits.append(s - 1u, width);
    zeros = 0;
  }
  return cs;
}

SymbolString decode(const CodedStream& stream) {
  BitReader reader(stream.bits);
  const std::uint64_t n = prefix_decode_nat(reader);
  if (n != stream.n) throw MalformedStream("header length disagrees with the stream record");
  if (reader.position() != stream.header_bits) throw MalformedStream("header size mismatch");
  const unsigned width = symbol_width(stream.alphabet_size);
  SymbolString out;
  out.alphabet_size = stream.alphabet_size;
  out.symbols.reserve(static_cast<std::size_t>(std::min<std::uint64_t>(n, 1u << 24)));
  while (!reader.at_end()) {
    std::uint8_t symbol = 0;
    const std::uint64_t zeros = read_run(reader, width, stream.alphabet_size, symbol);
    if (out.symbols.size() + zeros + 1 > n) throw MalformedStream("decoded length exceeds the header");
    out.symbols.insert(out.symbols.end(), zeros, 0);
    out.symbols.push_back(symbol);
  }
  out.symbols.resize(n, 0);
  return out;
}

std::uint64_t information_length(const RunString& rs) {
  std::uint64_t bits = rs.runs.size() * static_cast<std::uint64_t>(symbol_width(rs.alphabet_size));
  for (const auto& r : rs.runs) bits += prefix_code_length(r.zero_run);
  return bits;
}

std::uint64_t information_length(const SymbolString& omega) { return information_length(run_length(omega)); }

BoundsCheck verify_bounds(const SymbolString& omega) {
  if (omega.alphabet_size != 2) throw DomainError("verify_bounds requires a binary alphabet");
  const double n = static_cast<double>(omega.size());
  const double N = static_cast<double>(count_passages(omega, omega.size()));
  BoundsCheck b{};
  b.information = information_length(omega);
  b.slack = 2.0 * std::floor(std::log2(n + 1.0)) + 3.0;
  if (N == 0.0) {
    b.lower = b.upper = 2.0 * std::log2(n + 1.0);
  } else {
    b.lower = N + 2.0 * std::log2(n - N + 1.0);
    b.upper = N == n ? n : N + 2.0 * N * std::log2(n / N);
  }
  const double I = static_cast<double>(b.information);
  b.ok = b.lower - b.slack <= I && I <= b.upper + b.slack;
  return b;
}

RunString trunc_k(const RunString& rs, std::uint64_t k) {
  if (k < 1) throw DomainError("trunc_k requires k >= 1");
  RunString out = rs;
  for (auto& r : out.runs) r.zero_run = std::min(r.zero_run, k);
  return out;
}

std::vector<std::uint8_t> serialize(const CodedStream& stream) {
  if (stream.alphabet_size > 255) throw DomainError("file format supports alphabets up to 255 symbols");
  // Count runs so the reader can tell padding from body.
  BitReader reader(stream.bits, stream.header_bits);
  const unsigned width = symbol_width(stream.alphabet_size);
  std::uint64_t runs = 0;
  while (!reader.at_end()) {
    std::uint8_t symbol;
    read_run(reader, width, stream.alphabet_size, symbol);
    ++runs;
  }
  BitString payload;
  prefix_encode_nat(stream.n, payload);
  prefix_encode_nat(runs, payload);
  for (std::size_t i = stream.header_bits; i < stream.bits.size(); ++i) payload.push_back(stream.bits[i]);

  const auto& body = payload.bytes();
  std::vector<std::uint8_t> out(5 + body.size());
  out[0] = 'W';
  out[1] = 'C';
  out[2] = 'C';
  out[3] = '1';
  out[4] = static_cast<std::uint8_t>(stream.alphabet_size);
  std::copy(body.begin(), body.end(), out.begin() + 5);
  return out;
}

CodedStream deserialize(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 5 || !std::equal(bytes.begin(), bytes.begin() + 4, "WCC1"))
    throw MalformedStream("missing WCC1 magic");
  CodedStream cs;
  cs.alphabet_size = bytes[4];
  if (cs.alphabet_size < 2) throw MalformedStream("alphabet size below 2");
  const std::vector<std::uint8_t> body(bytes.begin() + 5, bytes.end());
  const BitString raw = BitString::from_bytes(body, body.size() * 8);
  BitReader reader(raw);
  cs.n = prefix_decode_nat(reader);
  const std::uint64_t runs = prefix_decode_nat(reader);
  const std::size_t body_start = reader.position();
  const unsigned width = symbol_width(cs.alphabet_size);
  for (std::uint64_t i = 0; i < runs; ++i) {
    std::uint8_t symbol;
    read_run(reader, width, cs.alphabet_size, symbol);
  }
  const std::size_t body_end = reader.position();
  if (raw.size() - body_end >= 8) throw MalformedStream("trailing bytes after the body");
  for (std::size_t i = body_end; i < raw.size(); ++i)
    if (raw[i]) throw MalformedStream("nonzero padding");

  prefix_encode_nat(cs.n, cs.bits);
  cs.header_bits = cs.bits.size();
  for (std::size_t i = body_start; i < body_end; ++i) cs.bits.push_back(raw[i]);
  return cs;
}

void write_stream(const std::string& path, const CodedStream& stream) {
  const auto bytes = serialize(stream);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DomainError("cannot write '" + path + "'");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DomainError("write failed for '" + path + "'");
}

CodedStream read_stream(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DomainError("cannot open '" + path + "'");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return deserialize(bytes);
}

}  // namespace wcc

#pragma once

#include <bit>
#include <cstdint>
#include <string>
#include <vector>

#include "wcc/bitstring.hpp"
#include "wcc/symbolic.hpp"

namespace wcc {

struct Run {
  std::uint64_t zero_run;
  std::uint8_t symbol;  // != 0

  friend bool operator==(const Run&, const Run&) = default;
};

// s(omega): zeros before each nonzero symbol, plus the zeros after the last one.
struct RunString {
  std::uint32_t alphabet_size = 2;
  std::vector<Run> runs;
  std::uint64_t trailing_zeros = 0;

  std::uint64_t length() const noexcept;
  std::vector<std::uint64_t> digits() const;

  friend bool operator==(const RunString&, const RunString&) = default;
};

struct CodedStream {
  BitString bits;  // prefix(n) followed by the body
  std::uint64_t n = 0;
  std::uint32_t alphabet_size = 2;
  std::size_t header_bits = 0;

  std::size_t body_bits() const noexcept { return bits.size() - header_bits; }
};

RunString run_length(const SymbolString& omega);
SymbolString expand(const RunString& rs);

// (1^L, 0, v - (2^L - 1) in L bits MSB-first) with L = floor(log2(v+1)).
BitString prefix_encode_nat(std::uint64_t v);
void prefix_encode_nat(std::uint64_t v, BitString& out);
std::uint64_t prefix_decode_nat(BitReader& reader);
constexpr std::uint64_t prefix_code_length(std::uint64_t v) noexcept {
  return 2 * static_cast<std::uint64_t>(std::bit_width(v + 1) - 1) + 1;
}

// ceil(log2(N - 1)); 0 for a binary alphabet.
unsigned symbol_width(std::uint32_t alphabet_size);

CodedStream encode(const SymbolString& omega);
SymbolString decode(const CodedStream& stream);

// Body length of encode(omega): sum of codeword lengths of the run digits
// plus one fixed-width symbol per passage.
std::uint64_t information_length(const SymbolString& omega);
std::uint64_t information_length(const RunString& rs);

struct BoundsCheck {
  double lower;
  std::uint64_t information;
  double upper;
  double slack;
  bool ok;
};

// Sandwich lower - C <= I <= upper + C with C = 2 floor(log2(n+1)) + 3.
BoundsCheck verify_bounds(const SymbolString& omega);

// Every run replaced by min(k, run).
RunString trunc_k(const RunString& rs, std::uint64_t k);

// "WCC1", alphabet byte, prefix(n), prefix(run count), body, zero padding.
std::vector<std::uint8_t> serialize(const CodedStream& stream);
CodedStream deserialize(const std::vector<std::uint8_t>& bytes);
void write_stream(const std::string& path, const CodedStream& stream);
CodedStream read_stream(const std::string& path);

}  // namespace wcc

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "wurba/time.hpp"

namespace wurba {

/// One bit per element, values 0 or 1, in transmission order.
using Bits = std::vector<std::uint8_t>;

enum class WurFrameType : std::uint8_t { WakeUp = 0, WurBeacon = 1, WurDiscovery = 2, VendorSpecific = 3 };

enum class DataRate : std::uint8_t { LDR, HDR };

std::string_view to_string(WurFrameType type);
std::string_view to_string(DataRate rate);
std::optional<WurFrameType> parse_frame_type(std::string_view text);
std::optional<DataRate> parse_data_rate(std::string_view text);

/// Payload bit duration: 16 us at LDR, 4 us at HDR.
Duration payload_bit_duration(DataRate rate);
/// OOK symbol duration inside WUR-Data: 4 us at LDR, 2 us at HDR.
Duration data_symbol_duration(DataRate rate);

inline constexpr std::uint16_t kMaxAddress = 0x0FFF;
inline constexpr std::uint16_t kBroadcastAddress = 0x0FFF;
inline constexpr std::size_t kHeaderBits = 32;
inline constexpr std::size_t kFcsBits = 16;
inline constexpr std::size_t kMinFrameBits = kHeaderBits + kFcsBits;

/// MAC-level WUR frame.
///
/// Frame Control octet: bits 0-2 carry the frame type, bit 3 is set when a
/// frame body follows the header, bits 4-7 are reserved and zero. Every
/// field is serialized most significant bit first.
struct WurFrame {
  WurFrameType type = WurFrameType::WakeUp;
  std::uint16_t address = 0;     // 12 bits
  std::uint16_t td_control = 0;  // 12 bits
  std::vector<std::uint8_t> body;
  std::uint16_t fcs = 0;  // filled in by finalize() / serialize_mac()

  std::uint8_t frame_control() const;
  std::size_t bit_length() const { return kMinFrameBits + 8 * body.size(); }

  friend bool operator==(const WurFrame&, const WurFrame&) = default;
};

/// Sets fcs to the checksum of the frame's header and body.
WurFrame finalize(WurFrame frame);

class CodecError : public std::runtime_error {
public:
  enum class Kind { FieldOverflow, Framing, Symbol, Checksum, Reserved, Multiplexing, Subchannel };

  CodecError(Kind kind, const std::string& message, std::size_t index = 0)
      : std::runtime_error(message), kind_(kind), index_(index) {}

  Kind kind() const { return kind_; }
  /// Chunk index for symbol errors, bit offset for framing errors.
  std::size_t index() const { return index_; }

private:
  Kind kind_;
  std::size_t index_;
};

/// CRC-16/CCITT-FALSE (poly 0x1021, init 0xFFFF, no reflection, no final
/// xor) over a bit sequence, processed in order. Requires a non-empty input.
std::uint16_t compute_fcs(std::span<const std::uint8_t> bits);

/// Frame Control || address || TD control || body || FCS. The FCS is
/// recomputed; the fcs member of the input is ignored.
Bits serialize_mac(const WurFrame& frame);

/// Parses and verifies a serialized frame. Throws CodecError on a bad
/// length, reserved bits, body/flag mismatch or FCS mismatch.
WurFrame deserialize_mac(std::span<const std::uint8_t> bits);

void append_bits(Bits& out, std::uint64_t value, unsigned width);
Bits bytes_to_bits(std::span<const std::uint8_t> bytes);

struct OokSymbolSeq {
  std::vector<std::uint8_t> symbols;  // 1 = on, 0 = off
  Duration symbol_duration{0};

  Duration duration() const { return symbol_duration * static_cast<std::int64_t>(symbols.size()); }
  friend bool operator==(const OokSymbolSeq&, const OokSymbolSeq&) = default;
};

/// LDR: 1 -> 1010, 0 -> 0101 with 4 us symbols. HDR: 1 -> 10, 0 -> 01 with
/// 2 us symbols.
OokSymbolSeq encode_manchester(std::span<const std::uint8_t> bits, DataRate rate);

/// Inverse of encode_manchester. Throws CodecError::Framing when the symbol
/// count is not a whole number of codewords and CodecError::Symbol (with the
/// offending chunk index) on an invalid codeword.
Bits decode_manchester(const OokSymbolSeq& symbols, DataRate rate);

/// Ordering of the two halves of the LDR sync field.
enum class LdrSyncOrder : std::uint8_t { ComplementTwice, PlainThenComplement };

/// First 32 output bits of the x^7 + x^6 + 1 LFSR started from all ones.
std::uint32_t default_sync_pattern();

inline constexpr Duration kSyncSymbolDuration = microseconds(2);

/// HDR: the 32-bit pattern, MSB first. LDR: the complemented pattern twice
/// (or pattern then complement). All symbols last 2 us.
OokSymbolSeq build_sync(DataRate rate, std::uint32_t base_sequence,
                        LdrSyncOrder order = LdrSyncOrder::ComplementTwice);

inline constexpr Duration kLegacyPreamble = microseconds(20);  // L-STF 8 + L-LTF 8 + L-SIG 4
inline constexpr Duration kBpskMark = microseconds(4);

struct PpduLayout {
  Duration preamble{0};
  Duration bpsk_mark{0};
  Duration sync{0};
  Duration data{0};
  Duration padding{0};
  Duration total{0};
  std::size_t payload_bits = 0;

  friend bool operator==(const PpduLayout&, const PpduLayout&) = default;
};

Duration sync_duration(DataRate rate);
PpduLayout ppdu_airtime(std::size_t payload_bits, DataRate rate);
PpduLayout ppdu_airtime(const WurFrame& frame, DataRate rate);

struct FdmaEntry {
  int subchannel = 0;
  WurFrame frame;
  DataRate rate = DataRate::LDR;
};

struct FdmaOptions {
  int primary_subchannel = 0;
  /// Subchannels the caller has punctured; no frame may use them. The
  /// primary may appear here only when the caller deliberately omits it.
  std::vector<int> punctured;
};

/// Pads every layout to the longest one in the set (padding follows
/// WUR-Data). Output order follows the input.
std::vector<PpduLayout> fdma_align(std::span<const FdmaEntry> entries, const FdmaOptions& options = {});

/// Human-readable dump used by the `inspect` CLI subcommand.
std::string describe_frame(const WurFrame& frame, DataRate rate, std::uint32_t sync_pattern,
                           LdrSyncOrder order = LdrSyncOrder::ComplementTwice);

}  // namespace wurba

#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>

#include "ipu/common/bytes.hpp"
#include "ipu/common/expected.hpp"
#include "ipu/csp/packet.hpp"
#include "ipu/csp/param_table.hpp"

namespace ipu::csp {

// Wire protocol for the param service (port 3).
//
// Request:  opcode u8 (1=GET, 2=SET) | id_len u8 | id bytes |
//           for SET: type u8 | value
// Reply:    status u8 (0=ok, else ParamError ordinal + 1) |
//           for ok GET: type u8 | timestamp_ms i64be | value
//           for ok SET: timestamp_ms i64be
// Value encodings by type tag: 0 bool (1 byte), 1 int (8 bytes two's
// complement BE), 2 float (IEEE-754 binary64 BE), 3 string and 4 blob
// (u16be length + bytes).

inline constexpr uint8_t kParamOpGet = 1;
inline constexpr uint8_t kParamOpSet = 2;

Bytes encode_param_get(const std::string& id);
Bytes encode_param_set(const std::string& id, const ParamValue& value);

// Service-side: apply one request payload to a table and produce the reply
// payload. Malformed requests yield an InvalidValue error reply rather than
// an exception (the peer may be hostile or corrupt).
Bytes handle_param_request(ParameterTable& table, ByteView request, int64_t now_ms);

struct ParamReply {
    ParamValue value;      // GET only; monostate-free: bool(false) for SET acks
    int64_t timestamp_ms = 0;
};

// Client-side reply parsers. Wire-level garbage maps to InvalidValue.
Expected<ParamReply, ParamError> parse_param_get_reply(ByteView payload);
Expected<ParamReply, ParamError> parse_param_set_reply(ByteView payload);

// One request->reply round trip over any transport. The exchange functor
// sends the request packet and returns the matching reply payload, or
// nullopt on timeout / no route.
using ExchangeFn = std::function<std::optional<Bytes>(const CspPacket& request)>;

enum class RemoteError {
    Unreachable,    // exchange returned nothing
    Protocol,       // reply payload did not parse
    UnknownParameter,
    NotWritable,
    TypeMismatch,
    InvalidValue,
};

const char* to_string(RemoteError e);
RemoteError remote_error_from(ParamError e);

Expected<ParamReply, RemoteError> param_remote_get(const ExchangeFn& exchange,
                                                   uint8_t src_addr, uint8_t dst_addr,
                                                   const std::string& id,
                                                   uint8_t src_port = 63);

Expected<ParamReply, RemoteError> param_remote_set(const ExchangeFn& exchange,
                                                   uint8_t src_addr, uint8_t dst_addr,
                                                   const std::string& id, const ParamValue& value,
                                                   uint8_t src_port = 63);

}  // namespace ipu::csp

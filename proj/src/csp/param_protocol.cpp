#include "ipu/csp/param_protocol.hpp"

#include <bit>
#include <cstring>
#include <stdexcept>

#include "ipu/csp/node.hpp"

namespace ipu::csp {

namespace {

constexpr uint8_t kStatusOk = 0;

void put_u16be(Bytes& out, uint16_t v) {
    out.push_back(static_cast<uint8_t>(v >> 8));
    out.push_back(static_cast<uint8_t>(v));
}

void put_u64be(Bytes& out, uint64_t v) {
    for (int shift = 56; shift >= 0; shift -= 8) {
        out.push_back(static_cast<uint8_t>(v >> shift));
    }
}

// Cursor over an untrusted payload; every read is bounds-checked.
struct Reader {
    ByteView data;
    size_t pos = 0;
    bool fail = false;

    uint8_t u8() {
        if (pos + 1 > data.size()) { fail = true; return 0; }
        return data[pos++];
    }
    uint16_t u16be() { return static_cast<uint16_t>(u8()) << 8 | u8(); }
    uint64_t u64be() {
        uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v = v << 8 | u8();
        return v;
    }
    Bytes take(size_t n) {
        if (pos + n > data.size()) { fail = true; return {}; }
        Bytes b(data.begin() + static_cast<ptrdiff_t>(pos),
                data.begin() + static_cast<ptrdiff_t>(pos + n));
        pos += n;
        return b;
    }
    bool done() const { return !fail && pos == data.size(); }
};

uint8_t type_tag(const ParamValue& v) { return static_cast<uint8_t>(v.index()); }

void put_value(Bytes& out, const ParamValue& v) {
    switch (v.index()) {
        case 0:
            out.push_back(std::get<bool>(v) ? 1 : 0);
            break;
        case 1:
            put_u64be(out, static_cast<uint64_t>(std::get<int64_t>(v)));
            break;
        case 2:
            put_u64be(out, std::bit_cast<uint64_t>(std::get<double>(v)));
            break;
        case 3: {
            const auto& s = std::get<std::string>(v);
            put_u16be(out, static_cast<uint16_t>(s.size()));
            out.insert(out.end(), s.begin(), s.end());
            break;
        }
        case 4: {
            const auto& b = std::get<Bytes>(v);
            put_u16be(out, static_cast<uint16_t>(b.size()));
            out.insert(out.end(), b.begin(), b.end());
            break;
        }
    }
}

// Returns false on malformed input.
bool read_value(Reader& r, uint8_t tag, ParamValue& out) {
    switch (tag) {
        case 0:
            out = r.u8() != 0;
            return !r.fail;
        case 1:
            out = static_cast<int64_t>(r.u64be());
            return !r.fail;
        case 2:
            out = std::bit_cast<double>(r.u64be());
            return !r.fail;
        case 3: {
            size_t n = r.u16be();
            Bytes raw = r.take(n);
            if (r.fail) return false;
            out = std::string(raw.begin(), raw.end());
            return true;
        }
        case 4: {
            size_t n = r.u16be();
            Bytes raw = r.take(n);
            if (r.fail) return false;
            out = std::move(raw);
            return true;
        }
        default:
            return false;
    }
}

Bytes error_reply(ParamError e) {
    return Bytes{static_cast<uint8_t>(static_cast<uint8_t>(e) + 1)};
}

}  // namespace

Bytes encode_param_get(const std::string& id) {
    if (id.empty() || id.size() > kMaxParamIdLength) {
        throw std::invalid_argument("parameter id length out of range");
    }
    Bytes out{kParamOpGet, static_cast<uint8_t>(id.size())};
    out.insert(out.end(), id.begin(), id.end());
    return out;
}

Bytes encode_param_set(const std::string& id, const ParamValue& value) {
    if (id.empty() || id.size() > kMaxParamIdLength) {
        throw std::invalid_argument("parameter id length out of range");
    }
    Bytes out{kParamOpSet, static_cast<uint8_t>(id.size())};
    out.insert(out.end(), id.begin(), id.end());
    out.push_back(type_tag(value));
    put_value(out, value);
    return out;
}

Bytes handle_param_request(ParameterTable& table, ByteView request, int64_t now_ms) {
    Reader r{request};
    uint8_t op = r.u8();
    uint8_t id_len = r.u8();
    Bytes id_raw = r.take(id_len);
    if (r.fail || id_len == 0) return error_reply(ParamError::InvalidValue);
    std::string id(id_raw.begin(), id_raw.end());

    if (op == kParamOpGet) {
        if (!r.done()) return error_reply(ParamError::InvalidValue);
        auto got = table.get(id);
        if (!got.ok()) return error_reply(got.error());
        Bytes out{kStatusOk, type_tag(got.value().value)};
        put_u64be(out, static_cast<uint64_t>(got.value().timestamp_ms));
        put_value(out, got.value().value);
        return out;
    }
    if (op == kParamOpSet) {
        uint8_t tag = r.u8();
        ParamValue value;
        if (r.fail || !read_value(r, tag, value) || !r.done()) {
            return error_reply(ParamError::InvalidValue);
        }
        auto set = table.set_remote(id, value, now_ms);
        if (!set.ok()) return error_reply(set.error());
        Bytes out{kStatusOk};
        put_u64be(out, static_cast<uint64_t>(set.value()));
        return out;
    }
    return error_reply(ParamError::InvalidValue);
}

Expected<ParamReply, ParamError> parse_param_get_reply(ByteView payload) {
    Reader r{payload};
    uint8_t status = r.u8();
    if (r.fail) return ParamError::InvalidValue;
    if (status != kStatusOk) {
        if (status > static_cast<uint8_t>(ParamError::InvalidValue) + 1) {
            return ParamError::InvalidValue;
        }
        return static_cast<ParamError>(status - 1);
    }
    uint8_t tag = r.u8();
    ParamReply reply;
    reply.timestamp_ms = static_cast<int64_t>(r.u64be());
    if (r.fail || !read_value(r, tag, reply.value) || !r.done()) {
        return ParamError::InvalidValue;
    }
    return reply;
}

Expected<ParamReply, ParamError> parse_param_set_reply(ByteView payload) {
    Reader r{payload};
    uint8_t status = r.u8();
    if (r.fail) return ParamError::InvalidValue;
    if (status != kStatusOk) {
        if (status > static_cast<uint8_t>(ParamError::InvalidValue) + 1) {
            return ParamError::InvalidValue;
        }
        return static_cast<ParamError>(status - 1);
    }
    ParamReply reply;
    reply.timestamp_ms = static_cast<int64_t>(r.u64be());
    if (r.fail || !r.done()) return ParamError::InvalidValue;
    return reply;
}

const char* to_string(RemoteError e) {
    switch (e) {
        case RemoteError::Unreachable: return "unreachable";
        case RemoteError::Protocol: return "protocol error";
        case RemoteError::UnknownParameter: return "unknown parameter";
        case RemoteError::NotWritable: return "parameter not writable";
        case RemoteError::TypeMismatch: return "type mismatch";
        case RemoteError::InvalidValue: return "invalid value";
    }
    return "?";
}

RemoteError remote_error_from(ParamError e) {
    switch (e) {
        case ParamError::UnknownParameter: return RemoteError::UnknownParameter;
        case ParamError::NotWritable: return RemoteError::NotWritable;
        case ParamError::TypeMismatch: return RemoteError::TypeMismatch;
        case ParamError::InvalidValue: return RemoteError::InvalidValue;
    }
    return RemoteError::Protocol;
}

namespace {

CspPacket make_request(uint8_t src_addr, uint8_t dst_addr, uint8_t src_port, Bytes payload) {
    CspPacket p;
    p.priority = 1;
    p.src_addr = src_addr;
    p.dst_addr = dst_addr;
    p.dst_port = kPortParam;
    p.src_port = src_port;
    p.payload = std::move(payload);
    return p;
}

}  // namespace

Expected<ParamReply, RemoteError> param_remote_get(const ExchangeFn& exchange,
                                                   uint8_t src_addr, uint8_t dst_addr,
                                                   const std::string& id, uint8_t src_port) {
    auto reply = exchange(make_request(src_addr, dst_addr, src_port, encode_param_get(id)));
    if (!reply) return RemoteError::Unreachable;
    auto parsed = parse_param_get_reply(*reply);
    if (!parsed.ok()) return remote_error_from(parsed.error());
    return parsed.value();
}

Expected<ParamReply, RemoteError> param_remote_set(const ExchangeFn& exchange,
                                                   uint8_t src_addr, uint8_t dst_addr,
                                                   const std::string& id, const ParamValue& value,
                                                   uint8_t src_port) {
    auto reply = exchange(make_request(src_addr, dst_addr, src_port, encode_param_set(id, value)));
    if (!reply) return RemoteError::Unreachable;
    auto parsed = parse_param_set_reply(*reply);
    if (!parsed.ok()) return remote_error_from(parsed.error());
    return parsed.value();
}

}  // namespace ipu::csp

#include "stereodiff/protocol.hpp"

#include <algorithm>
#include <bit>
#include <cstring>

#include "stereodiff/error.hpp"

namespace stereodiff::protocol {

namespace {

constexpr std::uint32_t kMaxDims = 8;

[[noreturn]] void violation(const std::string& what)
{
    throw Error(ErrorCode::ProtocolViolation, what);
}

class Writer {
public:
    void u32(std::uint32_t v)
    {
        for (int i = 0; i < 4; ++i) out_.push_back(std::uint8_t(v >> (8 * i)));
    }
    void u64(std::uint64_t v)
    {
        for (int i = 0; i < 8; ++i) out_.push_back(std::uint8_t(v >> (8 * i)));
    }
    void bytes(std::span<const std::uint8_t> b) { out_.insert(out_.end(), b.begin(), b.end()); }
    void tensor(const WireTensor& t)
    {
        if (t.element_count() != t.data.size()) violation("tensor dims do not match its data");
        u32(std::uint32_t(t.dims.size()));
        for (auto d : t.dims) u32(d);
        out_.reserve(out_.size() + 4 * t.data.size());
        for (float f : t.data) u32(std::bit_cast<std::uint32_t>(f));
    }
    std::vector<std::uint8_t> take() { return std::move(out_); }

private:
    std::vector<std::uint8_t> out_;
};

class Reader {
public:
    explicit Reader(std::span<const std::uint8_t> in) : in_(in) {}

    std::uint32_t u32()
    {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= std::uint32_t(in_[pos_ + i]) << (8 * i);
        pos_ += 4;
        return v;
    }
    std::uint64_t u64()
    {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= std::uint64_t(in_[pos_ + i]) << (8 * i);
        pos_ += 8;
        return v;
    }
    std::string text(std::size_t n)
    {
        need(n);
        std::string s(reinterpret_cast<const char*>(in_.data() + pos_), n);
        pos_ += n;
        return s;
    }
    WireTensor tensor()
    {
        WireTensor t;
        const std::uint32_t ndim = u32();
        if (ndim > kMaxDims) violation("tensor has too many dimensions");
        std::uint64_t count = 1;
        for (std::uint32_t i = 0; i < ndim; ++i) {
            const std::uint32_t d = u32();
            t.dims.push_back(d);
            count *= d;
            if (count > remaining() / 4 + 1) count = remaining() / 4 + 1;  // saturate; checked below
        }
        if (count * 4 > remaining()) violation("tensor data is truncated");
        t.data.resize(count);
        for (auto& f : t.data) f = std::bit_cast<float>(u32());
        return t;
    }
    std::size_t remaining() const noexcept { return in_.size() - pos_; }
    void finish() const
    {
        if (remaining() != 0) violation("trailing bytes after payload");
    }

private:
    void need(std::size_t n) const
    {
        if (remaining() < n) violation("payload is truncated");
    }

    std::span<const std::uint8_t> in_;
    std::size_t pos_ = 0;
};

}  // namespace

std::size_t WireTensor::element_count() const noexcept
{
    std::size_t n = 1;
    for (auto d : dims) n *= d;
    return n;
}

Header decode_header(std::span<const std::uint8_t> bytes, std::uint64_t max_payload)
{
    if (bytes.size() < kHeaderSize) violation("frame header is truncated");
    if (!std::equal(kMagic.begin(), kMagic.end(), bytes.begin())) violation("bad magic");
    Reader r(bytes.subspan(4, kHeaderSize - 4));
    const std::uint32_t version = r.u32();
    if (version != kVersion) violation("unsupported protocol version " + std::to_string(version));
    const std::uint32_t type = r.u32();
    if (type < 1 || type > 3) violation("unknown message type " + std::to_string(type));
    const std::uint64_t len = r.u64();
    if (len > max_payload) violation("payload length exceeds the limit");
    return {MessageType(type), len};
}

std::vector<std::uint8_t> encode_frame(MessageType type, std::span<const std::uint8_t> payload)
{
    Writer w;
    w.bytes(kMagic);
    w.u32(kVersion);
    w.u32(std::uint32_t(type));
    w.u64(payload.size());
    w.bytes(payload);
    return w.take();
}

Frame decode_frame(std::span<const std::uint8_t> bytes, std::uint64_t max_payload)
{
    const Header h = decode_header(bytes, max_payload);
    if (bytes.size() - kHeaderSize != h.payload_len) violation("payload length does not match the frame size");
    return {h.type, {bytes.begin() + kHeaderSize, bytes.end()}};
}

std::vector<std::uint8_t> encode_payload(const PredictRequest& req)
{
    Writer w;
    w.u32(req.t);
    w.u32(std::uint32_t(req.condition.size()));
    w.bytes({reinterpret_cast<const std::uint8_t*>(req.condition.data()), req.condition.size()});
    w.u32(std::uint32_t(req.tensors.size()));
    for (const auto& t : req.tensors) w.tensor(t);
    return w.take();
}

std::vector<std::uint8_t> encode_payload(const PredictResponse& resp)
{
    Writer w;
    w.u32(std::uint32_t(resp.tensors.size()));
    for (const auto& t : resp.tensors) w.tensor(t);
    return w.take();
}

std::vector<std::uint8_t> encode_payload(const ErrorMessage& err)
{
    Writer w;
    w.u32(err.code);
    w.bytes({reinterpret_cast<const std::uint8_t*>(err.message.data()), err.message.size()});
    return w.take();
}

PredictRequest decode_request(std::span<const std::uint8_t> payload)
{
    Reader r(payload);
    PredictRequest req;
    req.t = r.u32();
    const std::uint32_t cond_len = r.u32();
    req.condition = r.text(cond_len);
    const std::uint32_t n = r.u32();
    if (n > r.remaining() / 4) violation("tensor count exceeds the payload");
    for (std::uint32_t i = 0; i < n; ++i) req.tensors.push_back(r.tensor());
    r.finish();
    return req;
}

PredictResponse decode_response(std::span<const std::uint8_t> payload)
{
    Reader r(payload);
    PredictResponse resp;
    const std::uint32_t n = r.u32();
    if (n > r.remaining() / 4) violation("tensor count exceeds the payload");
    for (std::uint32_t i = 0; i < n; ++i) resp.tensors.push_back(r.tensor());
    r.finish();
    return resp;
}

ErrorMessage decode_error(std::span<const std::uint8_t> payload)
{
    Reader r(payload);
    ErrorMessage err;
    err.code = r.u32();
    err.message = r.text(r.remaining());
    return err;
}

WireTensor pack_sequence(std::span<const LatentTensor> seq)
{
    WireTensor t;
    if (seq.empty()) {
        t.dims = {0, 0, 0, 0};
        return t;
    }
    const auto& f = seq.front();
    t.dims = {std::uint32_t(seq.size()), std::uint32_t(f.channels()), std::uint32_t(f.height()),
              std::uint32_t(f.width())};
    t.data.reserve(seq.size() * f.size());
    for (const auto& z : seq) {
        if (!z.same_shape(f)) throw Error(ErrorCode::ShapeMismatch, "sequence latents differ in shape");
        t.data.insert(t.data.end(), z.data().begin(), z.data().end());
    }
    return t;
}

std::vector<LatentTensor> unpack_sequence(const WireTensor& tensor)
{
    if (tensor.dims.size() != 4 || tensor.element_count() != tensor.data.size())
        violation("expected a [frames, channels, h, w] tensor");
    const auto [n, c, h, w] = std::array{tensor.dims[0], tensor.dims[1], tensor.dims[2], tensor.dims[3]};
    const std::size_t per = std::size_t(c) * h * w;
    std::vector<LatentTensor> out;
    out.reserve(n);
    for (std::uint32_t i = 0; i < n; ++i) {
        auto first = tensor.data.begin() + std::ptrdiff_t(i * per);
        out.emplace_back(int(c), int(h), int(w), std::vector<float>(first, first + std::ptrdiff_t(per)));
    }
    return out;
}

}  // namespace stereodiff::protocol

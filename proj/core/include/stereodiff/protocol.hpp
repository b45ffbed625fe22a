#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <vector>

#include "stereodiff/denoiser.hpp"

namespace stereodiff::protocol {

// Frame: magic "SVDN" | version u32 | msg_type u32 | payload_len u64 | payload, all little-endian.

inline constexpr std::array<std::uint8_t, 4> kMagic = {'S', 'V', 'D', 'N'};
inline constexpr std::uint32_t kVersion = 1;
inline constexpr std::size_t kHeaderSize = 20;
inline constexpr std::uint64_t kDefaultMaxPayload = std::uint64_t(1) << 30;

enum class MessageType : std::uint32_t {
    PredictRequest = 1,
    PredictResponse = 2,
    Error = 3,
};

/// Codes carried by error frames.
enum class WireError : std::uint32_t {
    BadMagic = 1,
    BadVersion = 2,
    BadMessageType = 3,
    MalformedPayload = 4,
    ModelFailure = 5,
};

struct WireTensor {
    std::vector<std::uint32_t> dims;
    std::vector<float> data;

    std::size_t element_count() const noexcept;
    friend bool operator==(const WireTensor&, const WireTensor&) = default;
};

struct PredictRequest {
    std::uint32_t t = 0;
    std::string condition;
    std::vector<WireTensor> tensors;

    friend bool operator==(const PredictRequest&, const PredictRequest&) = default;
};

struct PredictResponse {
    std::vector<WireTensor> tensors;

    friend bool operator==(const PredictResponse&, const PredictResponse&) = default;
};

struct ErrorMessage {
    std::uint32_t code = 0;
    std::string message;

    friend bool operator==(const ErrorMessage&, const ErrorMessage&) = default;
};

struct Frame {
    MessageType type = MessageType::Error;
    std::vector<std::uint8_t> payload;
};

struct Header {
    MessageType type;
    std::uint64_t payload_len;
};

/// Validates magic and version. Throws ProtocolViolation.
Header decode_header(std::span<const std::uint8_t> bytes, std::uint64_t max_payload = kDefaultMaxPayload);

std::vector<std::uint8_t> encode_frame(MessageType type, std::span<const std::uint8_t> payload);
/// Parses exactly one frame occupying the whole buffer.
Frame decode_frame(std::span<const std::uint8_t> bytes, std::uint64_t max_payload = kDefaultMaxPayload);

std::vector<std::uint8_t> encode_payload(const PredictRequest& req);
std::vector<std::uint8_t> encode_payload(const PredictResponse& resp);
std::vector<std::uint8_t> encode_payload(const ErrorMessage& err);

PredictRequest decode_request(std::span<const std::uint8_t> payload);
PredictResponse decode_response(std::span<const std::uint8_t> payload);
ErrorMessage decode_error(std::span<const std::uint8_t> payload);

/// Byte stream carrying frames. One request is in flight at a time.
class Transport {
public:
    virtual ~Transport() = default;
    virtual void write_all(std::span<const std::uint8_t> bytes) = 0;
    /// Fills `out` completely. Throws ConnectionFailed on EOF or error.
    virtual void read_exact(std::span<std::uint8_t> out) = 0;
};

/// Transport over a pair of file descriptors (pipes, socketpair, TCP socket).
class FdTransport final : public Transport {
public:
    FdTransport(int read_fd, int write_fd, bool owns = true) noexcept;
    ~FdTransport() override;
    FdTransport(const FdTransport&) = delete;
    FdTransport& operator=(const FdTransport&) = delete;

    void write_all(std::span<const std::uint8_t> bytes) override;
    void read_exact(std::span<std::uint8_t> out) override;

private:
    int read_fd_;
    int write_fd_;
    bool owns_;
};

/// Child process speaking the protocol on its stdin/stdout.
class ProcessTransport final : public Transport {
public:
    explicit ProcessTransport(const std::string& command);
    ~ProcessTransport() override;
    ProcessTransport(const ProcessTransport&) = delete;
    ProcessTransport& operator=(const ProcessTransport&) = delete;

    void write_all(std::span<const std::uint8_t> bytes) override;
    void read_exact(std::span<std::uint8_t> out) override;

private:
    std::unique_ptr<FdTransport> io_;
    int pid_ = -1;
};

std::unique_ptr<Transport> connect_tcp(const std::string& host, std::uint16_t port);

/// Two connected in-process endpoints.
std::pair<std::unique_ptr<Transport>, std::unique_ptr<Transport>> make_socket_pair();

/// "tcp://host:port" or "exec:<shell command>".
std::unique_ptr<Transport> open_transport(const std::string& address);

void write_frame(Transport& io, MessageType type, std::span<const std::uint8_t> payload);
Frame read_frame(Transport& io, std::uint64_t max_payload = kDefaultMaxPayload);

/// Server side of one frame: decodes a request, runs the model, returns the encoded reply frame.
/// Malformed input always yields an error frame.
std::vector<std::uint8_t> handle_frame(std::span<const std::uint8_t> frame, DenoiserEndpoint& model,
                                       std::uint64_t max_payload = kDefaultMaxPayload);

/// Serves requests until the peer closes the stream or sends a frame that desynchronizes it.
void serve(Transport& io, DenoiserEndpoint& model, std::uint64_t max_payload = kDefaultMaxPayload);

/// Denoiser endpoint backed by a remote model. The whole sequence travels as one
/// [frames, channels, h, w] tensor; the reply carries eps and var of the same shape.
class ExternalDenoiser final : public DenoiserEndpoint {
public:
    explicit ExternalDenoiser(std::unique_ptr<Transport> io, std::size_t max_sequence_length = 16,
                              std::uint64_t max_payload = kDefaultMaxPayload);

    Prediction predict(std::span<const LatentTensor> z, std::string_view condition, int t,
                       const SequenceRef& ref) override;
    std::size_t max_sequence_length() const noexcept override { return max_len_; }

    /// Raw request/response exchange.
    PredictResponse exchange(const PredictRequest& req);

private:
    std::unique_ptr<Transport> io_;
    std::size_t max_len_;
    std::uint64_t max_payload_;
    std::mutex mutex_;
};

WireTensor pack_sequence(std::span<const LatentTensor> seq);
std::vector<LatentTensor> unpack_sequence(const WireTensor& tensor);

}  // namespace stereodiff::protocol

#include <algorithm>
#include <cerrno>
#include <csignal>
#include <cstring>

#include <fcntl.h>
#include <netdb.h>
#include <sys/socket.h>
#include <sys/wait.h>
#include <unistd.h>

#include "stereodiff/error.hpp"
#include "stereodiff/protocol.hpp"

namespace stereodiff::protocol {

namespace {

[[noreturn]] void connection_error(const std::string& what)
{
    throw Error(ErrorCode::ConnectionFailed, what + ": " + std::strerror(errno));
}

std::vector<std::uint8_t> error_frame(WireError code, const std::string& message)
{
    return encode_frame(MessageType::Error, encode_payload(ErrorMessage{std::uint32_t(code), message}));
}

/// Maps a header to the error code a server reports for it, or 0 when it is well-formed.
std::uint32_t classify_header(std::span<const std::uint8_t> h, std::uint64_t max_payload)
{
    if (!std::equal(kMagic.begin(), kMagic.end(), h.begin())) return std::uint32_t(WireError::BadMagic);
    try {
        decode_header(h, max_payload);
    } catch (const Error& e) {
        const std::uint32_t version = h[4] | h[5] << 8 | h[6] << 16 | std::uint32_t(h[7]) << 24;
        if (version != kVersion) return std::uint32_t(WireError::BadVersion);
        const std::uint32_t type = h[8] | h[9] << 8 | h[10] << 16 | std::uint32_t(h[11]) << 24;
        if (type < 1 || type > 3) return std::uint32_t(WireError::BadMessageType);
        return std::uint32_t(WireError::MalformedPayload);
    }
    return 0;
}

std::vector<std::uint8_t> run_request(std::span<const std::uint8_t> payload, DenoiserEndpoint& model)
{
    PredictRequest req;
    try {
        req = decode_request(payload);
    } catch (const Error& e) {
        return error_frame(WireError::MalformedPayload, e.what());
    }
    if (req.tensors.size() != 1 || req.tensors[0].dims.size() != 4)
        return error_frame(WireError::MalformedPayload, "expected one [frames, channels, h, w] tensor");
    try {
        const std::vector<LatentTensor> z = unpack_sequence(req.tensors[0]);
        Prediction p = model.predict(z, req.condition, int(req.t), SequenceRef{});
        validate_prediction(z, p);
        PredictResponse resp{{pack_sequence(p.eps), pack_sequence(p.var)}};
        resp.tensors[0].dims = req.tensors[0].dims;
        resp.tensors[1].dims = req.tensors[0].dims;
        return encode_frame(MessageType::PredictResponse, encode_payload(resp));
    } catch (const std::exception& e) {
        return error_frame(WireError::ModelFailure, e.what());
    }
}

}  // namespace

FdTransport::FdTransport(int read_fd, int write_fd, bool owns) noexcept
    : read_fd_(read_fd), write_fd_(write_fd), owns_(owns)
{
}

FdTransport::~FdTransport()
{
    if (!owns_) return;
    if (write_fd_ >= 0 && write_fd_ != read_fd_) ::close(write_fd_);
    if (read_fd_ >= 0) ::close(read_fd_);
}

void FdTransport::write_all(std::span<const std::uint8_t> bytes)
{
    std::size_t done = 0;
    while (done < bytes.size()) {
        ssize_t n = ::send(write_fd_, bytes.data() + done, bytes.size() - done, MSG_NOSIGNAL);
        if (n < 0 && errno == ENOTSOCK) n = ::write(write_fd_, bytes.data() + done, bytes.size() - done);
        if (n < 0) {
            if (errno == EINTR) continue;
            connection_error("write to denoiser failed");
        }
        done += std::size_t(n);
    }
}

void FdTransport::read_exact(std::span<std::uint8_t> out)
{
    std::size_t done = 0;
    while (done < out.size()) {
        const ssize_t n = ::read(read_fd_, out.data() + done, out.size() - done);
        if (n < 0) {
            if (errno == EINTR) continue;
            connection_error("read from denoiser failed");
        }
        if (n == 0) throw Error(ErrorCode::ConnectionFailed, "denoiser closed the connection");
        done += std::size_t(n);
    }
}

ProcessTransport::ProcessTransport(const std::string& command)
{
    // A child that exits early must surface as an error, not kill us.
    std::signal(SIGPIPE, SIG_IGN);
    int to_child[2];
    int from_child[2];
    if (::pipe2(to_child, O_CLOEXEC) != 0) connection_error("pipe");
    if (::pipe2(from_child, O_CLOEXEC) != 0) {
        ::close(to_child[0]);
        ::close(to_child[1]);
        connection_error("pipe");
    }
    pid_ = ::fork();
    if (pid_ < 0) connection_error("fork");
    if (pid_ == 0) {
        ::dup2(to_child[0], STDIN_FILENO);
        ::dup2(from_child[1], STDOUT_FILENO);
        ::execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
        ::_exit(127);
    }
    ::close(to_child[0]);
    ::close(from_child[1]);
    io_ = std::make_unique<FdTransport>(from_child[0], to_child[1]);
}

ProcessTransport::~ProcessTransport()
{
    io_.reset();
    if (pid_ > 0) {
        int status = 0;
        while (::waitpid(pid_, &status, 0) < 0 && errno == EINTR) {
        }
    }
}

void ProcessTransport::write_all(std::span<const std::uint8_t> bytes)
{
    io_->write_all(bytes);
}

void ProcessTransport::read_exact(std::span<std::uint8_t> out)
{
    io_->read_exact(out);
}

std::unique_ptr<Transport> connect_tcp(const std::string& host, std::uint16_t port)
{
    addrinfo hints{};
    hints.ai_family = AF_UNSPEC;
    hints.ai_socktype = SOCK_STREAM;
    addrinfo* res = nullptr;
    const std::string service = std::to_string(port);
    if (const int rc = ::getaddrinfo(host.c_str(), service.c_str(), &hints, &res); rc != 0)
        throw Error(ErrorCode::ConnectionFailed, "cannot resolve " + host + ": " + ::gai_strerror(rc));
    int fd = -1;
    for (addrinfo* ai = res; ai; ai = ai->ai_next) {
        fd = ::socket(ai->ai_family, ai->ai_socktype | SOCK_CLOEXEC, ai->ai_protocol);
        if (fd < 0) continue;
        if (::connect(fd, ai->ai_addr, ai->ai_addrlen) == 0) break;
        ::close(fd);
        fd = -1;
    }
    ::freeaddrinfo(res);
    if (fd < 0) connection_error("cannot connect to " + host + ":" + service);
    return std::make_unique<FdTransport>(fd, fd);
}

std::pair<std::unique_ptr<Transport>, std::unique_ptr<Transport>> make_socket_pair()
{
    int fds[2];
    if (::socketpair(AF_UNIX, SOCK_STREAM | SOCK_CLOEXEC, 0, fds) != 0) connection_error("socketpair");
    return {std::make_unique<FdTransport>(fds[0], fds[0]), std::make_unique<FdTransport>(fds[1], fds[1])};
}

std::unique_ptr<Transport> open_transport(const std::string& address)
{
    constexpr std::string_view tcp = "tcp://";
    constexpr std::string_view exec = "exec:";
    if (address.starts_with(tcp)) {
        const std::string rest = address.substr(tcp.size());
        const auto colon = rest.rfind(':');
        if (colon == std::string::npos || colon == 0)
            throw Error(ErrorCode::InvalidArgument, "expected tcp://host:port, got " + address);
        unsigned long port = 0;
        try {
            port = std::stoul(rest.substr(colon + 1));
        } catch (const std::exception&) {
            port = 0;
        }
        if (port == 0 || port > 65535) throw Error(ErrorCode::InvalidArgument, "bad port in " + address);
        return connect_tcp(rest.substr(0, colon), std::uint16_t(port));
    }
    if (address.starts_with(exec) && address.size() > exec.size())
        return std::make_unique<ProcessTransport>(address.substr(exec.size()));
    throw Error(ErrorCode::InvalidArgument, "unrecognized denoiser address " + address);
}

void write_frame(Transport& io, MessageType type, std::span<const std::uint8_t> payload)
{
    io.write_all(encode_frame(type, payload));
}

Frame read_frame(Transport& io, std::uint64_t max_payload)
{
    std::array<std::uint8_t, kHeaderSize> header{};
    io.read_exact(header);
    const Header h = decode_header(header, max_payload);
    Frame f{h.type, std::vector<std::uint8_t>(h.payload_len)};
    io.read_exact(f.payload);
    return f;
}

std::vector<std::uint8_t> handle_frame(std::span<const std::uint8_t> frame, DenoiserEndpoint& model,
                                       std::uint64_t max_payload)
{
    if (frame.size() < kHeaderSize) return error_frame(WireError::MalformedPayload, "frame header is truncated");
    if (const std::uint32_t code = classify_header(frame.first(kHeaderSize), max_payload))
        return error_frame(WireError(code), "invalid frame header");
    const Header h = decode_header(frame, max_payload);
    if (frame.size() - kHeaderSize != h.payload_len)
        return error_frame(WireError::MalformedPayload, "payload length does not match the frame size");
    if (h.type != MessageType::PredictRequest)
        return error_frame(WireError::BadMessageType, "server accepts predict requests only");
    return run_request(frame.subspan(kHeaderSize), model);
}

void serve(Transport& io, DenoiserEndpoint& model, std::uint64_t max_payload)
{
    for (;;) {
        std::array<std::uint8_t, kHeaderSize> header{};
        try {
            io.read_exact(header);
        } catch (const Error&) {
            return;
        }
        if (const std::uint32_t code = classify_header(header, max_payload)) {
            // The stream cannot be resynchronized after a bad header.
            io.write_all(error_frame(WireError(code), "invalid frame header"));
            return;
        }
        const Header h = decode_header(header, max_payload);
        std::vector<std::uint8_t> payload(h.payload_len);
        io.read_exact(payload);
        if (h.type != MessageType::PredictRequest) {
            io.write_all(error_frame(WireError::BadMessageType, "server accepts predict requests only"));
            continue;
        }
        io.write_all(run_request(payload, model));
    }
}

ExternalDenoiser::ExternalDenoiser(std::unique_ptr<Transport> io, std::size_t max_sequence_length,
                                   std::uint64_t max_payload)
    : io_(std::move(io)), max_len_(max_sequence_length), max_payload_(max_payload)
{
}

PredictResponse ExternalDenoiser::exchange(const PredictRequest& req)
{
    std::lock_guard lock(mutex_);
    write_frame(*io_, MessageType::PredictRequest, encode_payload(req));
    const Frame f = read_frame(*io_, max_payload_);
    switch (f.type) {
    case MessageType::PredictResponse:
        return decode_response(f.payload);
    case MessageType::Error: {
        const ErrorMessage err = decode_error(f.payload);
        throw Error(ErrorCode::RemoteError,
                    "denoiser error " + std::to_string(err.code) + ": " + err.message);
    }
    default:
        throw Error(ErrorCode::ProtocolViolation, "unexpected message type from denoiser");
    }
}

Prediction ExternalDenoiser::predict(std::span<const LatentTensor> z, std::string_view condition, int t,
                                     const SequenceRef&)
{
    PredictRequest req{std::uint32_t(t), std::string(condition), {pack_sequence(z)}};
    const PredictResponse resp = exchange(req);
    if (resp.tensors.size() != 2) throw Error(ErrorCode::ProtocolViolation, "response must carry eps and var");
    for (const auto& tensor : resp.tensors) {
        if (tensor.dims != req.tensors[0].dims)
            throw Error(ErrorCode::ProtocolViolation, "response shape differs from the request");
    }
    Prediction p{unpack_sequence(resp.tensors[0]), unpack_sequence(resp.tensors[1])};
    validate_prediction(z, p);
    return p;
}

}  // namespace stereodiff::protocol

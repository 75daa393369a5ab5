#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "tiyuntsong/neural.hpp"

namespace tiyuntsong::nn {

namespace {

constexpr char kMagic[4] = {'T', 'Y', 'T', 'S'};

template <typename U>
void put_le(std::string& out, U value) {
  for (std::size_t i = 0; i < sizeof(U); ++i) out.push_back(static_cast<char>((value >> (8 * i)) & 0xff));
}

template <typename U>
U get_le(const std::string& in, std::size_t& pos) {
  if (pos + sizeof(U) > in.size()) throw std::runtime_error("checkpoint truncated");
  U value = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i)
    value |= static_cast<U>(static_cast<unsigned char>(in[pos + i])) << (8 * i);
  pos += sizeof(U);
  return value;
}

}  // namespace

void write_checkpoint(const std::filesystem::path& path, nlohmann::json header,
                      std::span<const Tensor* const> tensors) {
  nlohmann::json shapes = nlohmann::json::array();
  std::size_t floats = 0;
  for (const Tensor* t : tensors) {
    shapes.push_back(t->shape());
    floats += t->size();
  }
  header["tensors"] = std::move(shapes);
  const std::string head = header.dump();

  std::string blob(kMagic, sizeof(kMagic));
  put_le<std::uint32_t>(blob, kCheckpointVersion);
  put_le<std::uint64_t>(blob, head.size());
  blob += head;
  blob.reserve(blob.size() + 4 * floats);
  for (const Tensor* t : tensors)
    for (float v : t->data()) put_le<std::uint32_t>(blob, std::bit_cast<std::uint32_t>(v));

  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write checkpoint " + tmp.string());
    out.write(blob.data(), static_cast<std::streamsize>(blob.size()));
    if (!out) throw std::runtime_error("checkpoint write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

CheckpointContents read_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  const std::string blob = ss.str();

  if (blob.size() < sizeof(kMagic) || std::memcmp(blob.data(), kMagic, sizeof(kMagic)) != 0)
    throw std::runtime_error("not a checkpoint (bad magic): " + path.string());
  std::size_t pos = sizeof(kMagic);
  const auto version = get_le<std::uint32_t>(blob, pos);
  if (version != kCheckpointVersion)
    throw std::runtime_error("checkpoint version " + std::to_string(version) + " is not supported (expected " +
                             std::to_string(kCheckpointVersion) + ")");
  const auto head_len = get_le<std::uint64_t>(blob, pos);
  if (head_len > blob.size() - pos) throw std::runtime_error("checkpoint truncated");

  CheckpointContents out;
  try {
    out.header = nlohmann::json::parse(blob.substr(pos, head_len));
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(std::string("checkpoint header: ") + e.what());
  }
  pos += head_len;
  try {
    for (const auto& shape_json : out.header.at("tensors")) {
      auto shape = shape_json.get<std::vector<std::size_t>>();
      Tensor t(shape);
      if (t.size() > (blob.size() - pos) / 4) throw std::runtime_error("checkpoint truncated");
      for (auto& v : t.data()) v = std::bit_cast<float>(get_le<std::uint32_t>(blob, pos));
      out.tensors.push_back(std::move(t));
    }
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(std::string("checkpoint header: ") + e.what());
  }
  if (pos != blob.size()) throw std::runtime_error("checkpoint has trailing bytes");
  return out;
}

void assign_state(std::span<Tensor* const> state, std::span<const Tensor> tensors) {
  if (state.size() != tensors.size())
    throw std::runtime_error("checkpoint holds " + std::to_string(tensors.size()) + " tensors, network needs " +
                             std::to_string(state.size()));
  for (std::size_t i = 0; i < state.size(); ++i) {
    if (state[i]->shape() != tensors[i].shape())
      throw std::runtime_error("checkpoint tensor " + std::to_string(i) + " has shape " +
                               shape_string(tensors[i].shape()) + ", network needs " +
                               shape_string(state[i]->shape()));
  }
  for (std::size_t i = 0; i < state.size(); ++i) *state[i] = tensors[i];
}

void save(const Sequential& net, const std::filesystem::path& path) {
  const auto state = net.state();
  write_checkpoint(path, {{"kind", "sequential"}, {"network", net.spec()}}, state);
}

Sequential load_sequential(const std::filesystem::path& path) {
  auto contents = read_checkpoint(path);
  if (contents.header.value("kind", "") != "sequential")
    throw std::runtime_error("checkpoint does not hold a sequential network");
  Sequential net = Sequential::from_spec(contents.header.at("network"));
  const auto state = net.state();
  assign_state(state, contents.tensors);
  return net;
}

}  // namespace tiyuntsong::nn

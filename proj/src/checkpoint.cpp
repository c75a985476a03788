#include "brexit/checkpoint.hpp"

#include <fstream>
#include <iterator>
#include <map>

#include "brexit/bytes.hpp"

namespace brexit {

namespace {

constexpr char kMagic[8] = {'B', 'R', 'X', 'C', 'K', 'P', 'T', '1'};
constexpr std::uint32_t kVersion = 1;

enum class DType : std::uint8_t { kF32 = 0, kF64 = 1, kU8 = 2, kI64 = 3 };

std::size_t dtype_size(DType t) {
  switch (t) {
    case DType::kF32: return 4;
    case DType::kF64: return 8;
    case DType::kU8: return 1;
    case DType::kI64: return 8;
  }
  throw CheckpointError("unknown dtype");
}

struct Entry {
  DType dtype = DType::kU8;
  std::vector<std::uint64_t> dims;
  std::span<const std::uint8_t> data;
};

class EntryWriter {
 public:
  void f32(const std::string& name, std::span<const double> v) {
    begin(name, DType::kF32, {v.size()});
    for (double x : v) {
      const float f = static_cast<float>(x);
      if (static_cast<double>(f) != x) throw CheckpointError(name + ": value is not float32-representable");
      w_.put(f);
    }
  }
  void f64(const std::string& name, std::span<const double> v) {
    begin(name, DType::kF64, {v.size()});
    for (double x : v) w_.put(x);
  }
  void i64(const std::string& name, std::span<const std::int64_t> v) {
    begin(name, DType::kI64, {v.size()});
    for (auto x : v) w_.put(x);
  }
  void u8(const std::string& name, std::span<const std::uint8_t> v) {
    begin(name, DType::kU8, {v.size()});
    w_.put_bytes(v);
  }
  void text(const std::string& name, const std::string& s) {
    u8(name, std::span(reinterpret_cast<const std::uint8_t*>(s.data()), s.size()));
  }

  std::vector<std::uint8_t> finish() {
    ByteWriter out;
    out.put_bytes(std::span(reinterpret_cast<const std::uint8_t*>(kMagic), sizeof(kMagic)));
    out.put(kVersion);
    out.put(count_);
    out.put_bytes(w_.bytes());
    return out.take();
  }

 private:
  void begin(const std::string& name, DType t, std::vector<std::uint64_t> dims) {
    w_.put_string(name);
    w_.put(static_cast<std::uint8_t>(t));
    w_.put(static_cast<std::uint32_t>(dims.size()));
    for (auto d : dims) w_.put(d);
    ++count_;
  }

  ByteWriter w_;
  std::uint32_t count_ = 0;
};

std::map<std::string, Entry> read_entries(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  const auto magic = r.get_bytes(sizeof(kMagic));
  if (!std::equal(magic.begin(), magic.end(), reinterpret_cast<const std::uint8_t*>(kMagic)))
    throw CheckpointError("not a checkpoint file (bad magic)");
  const auto version = r.get<std::uint32_t>();
  if (version != kVersion) throw CheckpointError("unsupported checkpoint version " + std::to_string(version));
  const auto count = r.get<std::uint32_t>();
  std::map<std::string, Entry> entries;
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::string name = r.get_string();
    Entry e;
    e.dtype = static_cast<DType>(r.get<std::uint8_t>());
    const auto ndims = r.get<std::uint32_t>();
    std::uint64_t elements = 1;
    for (std::uint32_t d = 0; d < ndims; ++d) {
      e.dims.push_back(r.get<std::uint64_t>());
      elements *= e.dims.back();
    }
    e.data = r.get_bytes(elements * dtype_size(e.dtype));
    if (!entries.emplace(name, e).second) throw CheckpointError("duplicate entry '" + name + "'");
  }
  if (!r.done()) throw CheckpointError("trailing bytes after the last entry");
  return entries;
}

class EntryReader {
 public:
  explicit EntryReader(std::span<const std::uint8_t> bytes) : entries_(read_entries(bytes)) {}

  bool has(const std::string& name) const { return entries_.contains(name); }

  std::vector<double> floats(const std::string& name, DType expected) const {
    const Entry& e = get(name, expected);
    ByteReader r(e.data);
    std::vector<double> v(e.data.size() / dtype_size(expected));
    for (double& x : v) x = expected == DType::kF32 ? static_cast<double>(r.get<float>()) : r.get<double>();
    return v;
  }
  std::vector<std::int64_t> ints(const std::string& name) const {
    const Entry& e = get(name, DType::kI64);
    ByteReader r(e.data);
    std::vector<std::int64_t> v(e.data.size() / 8);
    for (auto& x : v) x = r.get<std::int64_t>();
    return v;
  }
  std::vector<std::uint8_t> bytes(const std::string& name) const {
    const Entry& e = get(name, DType::kU8);
    return {e.data.begin(), e.data.end()};
  }
  std::string text(const std::string& name) const {
    const auto b = bytes(name);
    return {b.begin(), b.end()};
  }

 private:
  const Entry& get(const std::string& name, DType expected) const {
    const auto it = entries_.find(name);
    if (it == entries_.end()) throw CheckpointError("missing entry '" + name + "'");
    if (it->second.dtype != expected) throw CheckpointError("entry '" + name + "' has the wrong dtype");
    return it->second;
  }

  std::map<std::string, Entry> entries_;
};

std::vector<std::int64_t> to_i64(const std::vector<int>& v) { return {v.begin(), v.end()}; }
std::vector<int> to_int(const std::vector<std::int64_t>& v) { return {v.begin(), v.end()}; }

}  // namespace

std::vector<std::uint8_t> serialize_checkpoint(const Checkpoint& c) {
  EntryWriter w;
  w.text("config/text", c.config_text);
  w.text("config/hash", c.config_hash);
  const std::int64_t scalars[] = {c.generation, c.optimizer.step};
  w.i64("state/generation_and_step", scalars);
  const NetworkConfig& n = c.network;
  const std::int64_t shape[] = {n.height, n.width, n.num_actions, n.num_opponent_heads};
  w.i64("network/shape", shape);
  w.i64("network/conv_channels", to_i64(n.conv_channels));
  w.i64("network/om_hidden", to_i64(n.om_hidden));
  w.i64("network/ac_hidden", to_i64(n.ac_hidden));
  w.f32("network/parameters", c.parameters);
  w.f64("optimizer/first_moment", c.optimizer.first_moment);
  w.f64("optimizer/second_moment", c.optimizer.second_moment);
  w.u8("replay_buffer", c.replay_buffer);
  const std::int64_t population_size[] = {static_cast<std::int64_t>(c.population.size())};
  w.i64("population/size", population_size);
  for (std::size_t i = 0; i < c.population.size(); ++i) w.f32("population/" + std::to_string(i), c.population[i]);
  return w.finish();
}

Checkpoint deserialize_checkpoint(std::span<const std::uint8_t> bytes) {
  const EntryReader r(bytes);
  Checkpoint c;
  c.config_text = r.text("config/text");
  c.config_hash = r.text("config/hash");
  const auto scalars = r.ints("state/generation_and_step");
  if (scalars.size() != 2) throw CheckpointError("entry 'state/generation_and_step' has the wrong shape");
  c.generation = static_cast<int>(scalars[0]);
  c.optimizer.step = scalars[1];
  const auto shape = r.ints("network/shape");
  if (shape.size() != 4) throw CheckpointError("entry 'network/shape' has the wrong shape");
  c.network.height = static_cast<int>(shape[0]);
  c.network.width = static_cast<int>(shape[1]);
  c.network.num_actions = static_cast<int>(shape[2]);
  c.network.num_opponent_heads = static_cast<int>(shape[3]);
  c.network.conv_channels = to_int(r.ints("network/conv_channels"));
  c.network.om_hidden = to_int(r.ints("network/om_hidden"));
  c.network.ac_hidden = to_int(r.ints("network/ac_hidden"));
  c.parameters = r.floats("network/parameters", DType::kF32);
  c.optimizer.first_moment = r.floats("optimizer/first_moment", DType::kF64);
  c.optimizer.second_moment = r.floats("optimizer/second_moment", DType::kF64);
  c.replay_buffer = r.bytes("replay_buffer");
  const auto population_size = r.ints("population/size");
  if (population_size.size() != 1 || population_size[0] < 0)
    throw CheckpointError("entry 'population/size' has the wrong shape");
  for (std::int64_t i = 0; i < population_size[0]; ++i)
    c.population.push_back(r.floats("population/" + std::to_string(i), DType::kF32));

  // Shapes must agree with the architecture.
  const std::size_t expected = Network(c.network, 0).parameter_count();
  if (c.parameters.size() != expected)
    throw CheckpointError("network/parameters holds " + std::to_string(c.parameters.size()) +
                          " values but the architecture needs " + std::to_string(expected));
  const bool fresh_optimizer = c.optimizer.first_moment.empty() && c.optimizer.second_moment.empty();
  if (!fresh_optimizer && (c.optimizer.first_moment.size() != expected || c.optimizer.second_moment.size() != expected))
    throw CheckpointError("optimizer moments do not match the parameter count");
  for (std::size_t i = 0; i < c.population.size(); ++i)
    if (c.population[i].size() != expected)
      throw CheckpointError("population/" + std::to_string(i) + " does not match the parameter count");
  return c;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint) {
  const auto bytes = serialize_checkpoint(checkpoint);
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw CheckpointError("cannot write " + tmp.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw CheckpointError("failed writing " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open checkpoint " + path.string());
  const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    return deserialize_checkpoint(bytes);
  } catch (const CheckpointError& e) {
    throw CheckpointError(path.string() + ": " + e.what());
  } catch (const std::runtime_error& e) {
    throw CheckpointError(path.string() + ": " + e.what());
  }
}

Network restore_network(const NetworkConfig& config, std::span<const double> parameters) {
  Network net(config, 0);
  if (parameters.size() != net.parameter_count()) throw CheckpointError("parameter count mismatch");
  std::copy(parameters.begin(), parameters.end(), net.parameters().begin());
  return net;
}

}  // namespace brexit

#include "brexit/game.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace brexit {

namespace {

constexpr std::int8_t chip_of(int player) { return static_cast<std::int8_t>(player + 1); }

char cell_char(Cell c) {
  switch (c) {
    case Cell::kPlayer0: return 'x';
    case Cell::kPlayer1: return 'o';
    default: return '.';
  }
}

std::int8_t char_cell(char ch) {
  switch (ch) {
    case '.': return 0;
    case 'x': return 1;
    case 'o': return 2;
    default: throw std::invalid_argument(std::string("invalid cell character '") + ch + "'");
  }
}

}  // namespace

std::optional<int> GameState::winner() const {
  if (outcome_ == Outcome::kWin0) return 0;
  if (outcome_ == Outcome::kWin1) return 1;
  return std::nullopt;
}

GameRules::GameRules(GameConfig config) : config_(config) {
  if (config_.connect_n < 2) throw std::invalid_argument("connect_n must be at least 2");
  if (config_.height < 1 || config_.width < 1)
    throw std::invalid_argument("board dimensions must be positive");
  if (config_.height > 127 || config_.width > 127 || config_.height * config_.width > kMaxCells)
    throw std::invalid_argument("board exceeds " + std::to_string(kMaxCells) + " cells");
  if (config_.height < config_.connect_n && config_.width < config_.connect_n)
    throw std::invalid_argument("no line of " + std::to_string(config_.connect_n) + " fits on a " +
                                std::to_string(config_.height) + "x" +
                                std::to_string(config_.width) + " board");
  num_actions_ = config_.gravity ? config_.width : config_.height * config_.width;
}

GameState GameRules::initial_state() const {
  GameState s;
  s.height_ = static_cast<std::int8_t>(config_.height);
  s.width_ = static_cast<std::int8_t>(config_.width);
  return s;
}

int GameRules::landing_cell(const GameState& state, int action) const {
  if (action < 0 || action >= num_actions_) return -1;
  if (!config_.gravity) return state.cells_[action] == 0 ? action : -1;
  for (int row = config_.height - 1; row >= 0; --row) {
    int idx = row * config_.width + action;
    if (state.cells_[idx] == 0) return idx;
  }
  return -1;
}

bool GameRules::is_legal(const GameState& state, int action) const {
  return !state.terminal() && landing_cell(state, action) >= 0;
}

std::vector<int> GameRules::legal_actions(const GameState& state) const {
  if (state.terminal()) throw std::logic_error("legal_actions: state is terminal");
  std::vector<int> actions;
  actions.reserve(static_cast<std::size_t>(num_actions_));
  if (config_.gravity) {
    for (int c = 0; c < config_.width; ++c)
      if (state.cells_[c] == 0) actions.push_back(c);
  } else {
    for (int i = 0; i < num_actions_; ++i)
      if (state.cells_[i] == 0) actions.push_back(i);
  }
  return actions;
}

std::vector<std::uint8_t> GameRules::legal_mask(const GameState& state) const {
  std::vector<std::uint8_t> mask(static_cast<std::size_t>(num_actions_), 0);
  for (int a : legal_actions(state)) mask[static_cast<std::size_t>(a)] = 1;
  return mask;
}

bool GameRules::completes_line(const GameState& state, int row, int col) const {
  const std::int8_t chip = state.cells_[row * config_.width + col];
  constexpr int kDirections[4][2] = {{0, 1}, {1, 0}, {1, 1}, {1, -1}};
  for (const auto& d : kDirections) {
    int run = 1;
    for (int sign : {1, -1}) {
      int r = row + sign * d[0];
      int c = col + sign * d[1];
      while (r >= 0 && r < config_.height && c >= 0 && c < config_.width &&
             state.cells_[r * config_.width + c] == chip) {
        ++run;
        r += sign * d[0];
        c += sign * d[1];
      }
    }
    if (run >= config_.connect_n) return true;
  }
  return false;
}

StepResult GameRules::apply_action(const GameState& state, int action) const {
  if (state.terminal()) throw std::invalid_argument("apply_action: state is terminal");
  const int idx = landing_cell(state, action);
  if (idx < 0) throw std::invalid_argument("apply_action: illegal action " + std::to_string(action));

  StepResult result;
  GameState& next = result.next_state;
  next = state;
  const int mover = state.to_move_;
  next.cells_[idx] = chip_of(mover);
  next.move_count_ = static_cast<std::int16_t>(state.move_count_ + 1);
  next.to_move_ = static_cast<std::int8_t>(1 - mover);

  if (completes_line(next, idx / config_.width, idx % config_.width)) {
    next.outcome_ = mover == 0 ? Outcome::kWin0 : Outcome::kWin1;
  } else if (next.move_count_ == num_cells()) {
    next.outcome_ = Outcome::kDraw;
  }
  result.terminal = next.terminal();
  result.winner = next.winner();
  result.rewards = rewards(next);
  return result;
}

bool GameRules::wins_with(const GameState& state, int action, int player) const {
  const int idx = landing_cell(state, action);
  if (idx < 0 || state.terminal()) return false;
  GameState probe = state;
  probe.cells_[idx] = chip_of(player);
  return completes_line(probe, idx / config_.width, idx % config_.width);
}

std::array<double, kNumPlayers> GameRules::rewards(const GameState& state) const {
  switch (state.outcome()) {
    case Outcome::kWin0: return {1.0, -1.0};
    case Outcome::kWin1: return {-1.0, 1.0};
    default: return {0.0, 0.0};
  }
}

GameState GameRules::mirror_state(const GameState& state) const {
  GameState m = state;
  const int w = config_.width;
  for (int r = 0; r < config_.height; ++r)
    for (int c = 0; c < w; ++c) m.cells_[r * w + c] = state.cells_[r * w + (w - 1 - c)];
  return m;
}

int GameRules::mirror_action(int action) const {
  if (action < 0 || action >= num_actions_) throw std::out_of_range("mirror_action: bad action");
  const int w = config_.width;
  if (config_.gravity) return w - 1 - action;
  return (action / w) * w + (w - 1 - action % w);
}

std::vector<double> GameRules::mirror_policy(std::span<const double> policy) const {
  if (policy.size() != static_cast<std::size_t>(num_actions_))
    throw std::invalid_argument("mirror_policy: expected " + std::to_string(num_actions_) +
                                " entries, got " + std::to_string(policy.size()));
  double sum = 0.0;
  for (double p : policy) {
    if (!(p >= 0.0) || !std::isfinite(p))
      throw std::invalid_argument("mirror_policy: negative or non-finite entry");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-6) throw std::invalid_argument("mirror_policy: entries do not sum to 1");
  std::vector<double> out(policy.size());
  for (int a = 0; a < num_actions_; ++a) out[static_cast<std::size_t>(mirror_action(a))] = policy[a];
  return out;
}

EncodedState GameRules::encode_state(const GameState& state, int perspective) const {
  if (perspective < 0 || perspective >= kNumPlayers)
    throw std::invalid_argument("encode_state: bad perspective");
  EncodedState enc;
  enc.height = config_.height;
  enc.width = config_.width;
  const std::size_t plane = static_cast<std::size_t>(num_cells());
  enc.data.assign(3 * plane, 0.0);
  const std::int8_t own = chip_of(perspective);
  for (std::size_t i = 0; i < plane; ++i) {
    const std::int8_t v = state.cells_[i];
    if (v == 0)
      enc.data[i] = 1.0;
    else if (v == own)
      enc.data[plane + i] = 1.0;
    else
      enc.data[2 * plane + i] = 1.0;
  }
  return enc;
}

Outcome GameRules::scan_outcome(const GameState& state) const {
  bool win[2] = {false, false};
  for (int i = 0; i < num_cells(); ++i) {
    const std::int8_t v = state.cells_[i];
    if (v != 0 && completes_line(state, i / config_.width, i % config_.width)) win[v - 1] = true;
  }
  if (win[0] && win[1]) throw std::invalid_argument("state has winning lines for both players");
  if (win[0]) return Outcome::kWin0;
  if (win[1]) return Outcome::kWin1;
  if (state.move_count_ == num_cells()) return Outcome::kDraw;
  return Outcome::kOngoing;
}

GameState GameRules::make_state(std::span<const std::int8_t> cells, int to_move) const {
  if (cells.size() != static_cast<std::size_t>(num_cells()))
    throw std::invalid_argument("cell count does not match board dimensions");
  GameState s = initial_state();
  int count[2] = {0, 0};
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (cells[i] < 0 || cells[i] > 2) throw std::invalid_argument("invalid cell value");
    s.cells_[i] = cells[i];
    if (cells[i] != 0) ++count[cells[i] - 1];
  }
  if (count[0] - count[1] != 0 && count[0] - count[1] != 1)
    throw std::invalid_argument("chip counts are inconsistent with alternating play");
  const int expected_to_move = count[0] == count[1] ? 0 : 1;
  if (to_move >= 0 && to_move != expected_to_move)
    throw std::invalid_argument("player to move is inconsistent with chip counts");
  if (config_.gravity) {
    for (int c = 0; c < config_.width; ++c)
      for (int r = 0; r + 1 < config_.height; ++r)
        if (s.cells_[r * config_.width + c] != 0 && s.cells_[(r + 1) * config_.width + c] == 0)
          throw std::invalid_argument("floating chip in column " + std::to_string(c));
  }
  s.to_move_ = static_cast<std::int8_t>(expected_to_move);
  s.move_count_ = static_cast<std::int16_t>(count[0] + count[1]);
  s.outcome_ = scan_outcome(s);
  return s;
}

GameState GameRules::from_rows(std::span<const std::string_view> rows) const {
  if (rows.size() != static_cast<std::size_t>(config_.height))
    throw std::invalid_argument("from_rows: expected " + std::to_string(config_.height) + " rows");
  std::vector<std::int8_t> cells;
  for (auto row : rows) {
    if (row.size() != static_cast<std::size_t>(config_.width))
      throw std::invalid_argument("from_rows: row width mismatch");
    for (char ch : row) cells.push_back(char_cell(ch));
  }
  return make_state(cells, -1);
}

std::string GameRules::render(const GameState& state) const {
  std::string out;
  for (int r = 0; r < state.height(); ++r) {
    for (int c = 0; c < state.width(); ++c) out += cell_char(state.at(r, c));
    out += '\n';
  }
  return out;
}

std::string GameRules::serialize(const GameState& state) const {
  std::string out = std::to_string(state.height()) + "x" + std::to_string(state.width()) + ":" +
                    std::to_string(state.to_move()) + ":";
  for (int i = 0; i < state.num_cells(); ++i) out += cell_char(state.cell(i));
  return out;
}

GameState GameRules::parse(std::string_view text) const {
  const auto x = text.find('x');
  const auto c1 = text.find(':');
  const auto c2 = c1 == std::string_view::npos ? c1 : text.find(':', c1 + 1);
  if (x == std::string_view::npos || c1 == std::string_view::npos || c2 == std::string_view::npos || x > c1)
    throw std::invalid_argument("parse: malformed state '" + std::string(text) + "'");
  const int h = std::stoi(std::string(text.substr(0, x)));
  const int w = std::stoi(std::string(text.substr(x + 1, c1 - x - 1)));
  const int to_move = std::stoi(std::string(text.substr(c1 + 1, c2 - c1 - 1)));
  if (h != config_.height || w != config_.width)
    throw std::invalid_argument("parse: board dimensions do not match the rules");
  std::vector<std::int8_t> cells;
  for (char ch : text.substr(c2 + 1)) cells.push_back(char_cell(ch));
  return make_state(cells, to_move);
}

std::vector<std::uint8_t> GameRules::pack(const GameState& state) const {
  std::vector<std::uint8_t> out(packed_size(), 0);
  out[0] = static_cast<std::uint8_t>(state.height());
  out[1] = static_cast<std::uint8_t>(state.width());
  out[2] = static_cast<std::uint8_t>(state.to_move());
  for (int i = 0; i < state.num_cells(); ++i)
    out[3 + i / 4] |= static_cast<std::uint8_t>(static_cast<int>(state.cell(i)) << (2 * (i % 4)));
  return out;
}

GameState GameRules::unpack(std::span<const std::uint8_t> bytes) const {
  if (bytes.size() != packed_size()) throw std::invalid_argument("unpack: wrong byte count");
  if (bytes[0] != config_.height || bytes[1] != config_.width)
    throw std::invalid_argument("unpack: board dimensions do not match the rules");
  std::vector<std::int8_t> cells(static_cast<std::size_t>(num_cells()));
  for (int i = 0; i < num_cells(); ++i)
    cells[static_cast<std::size_t>(i)] = static_cast<std::int8_t>((bytes[3 + i / 4] >> (2 * (i % 4))) & 3);
  return make_state(cells, bytes[2]);
}

}  // namespace brexit

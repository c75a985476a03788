#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace brexit {

inline constexpr int kMaxCells = 64;
inline constexpr int kNumPlayers = 2;

enum class Cell : std::int8_t { kEmpty = 0, kPlayer0 = 1, kPlayer1 = 2 };

enum class Outcome : std::int8_t { kOngoing = 0, kWin0, kWin1, kDraw };

/// Rules of a two-player "connect N" game on an H x W grid.
///
/// With gravity the action is a column and the chip drops to the lowest empty
/// cell (Connect4). Without gravity the action is a cell index row * W + col
/// (tic-tac-toe and other m,n,k-games).
struct GameConfig {
  int height = 6;
  int width = 7;
  int connect_n = 4;
  bool gravity = true;

  friend bool operator==(const GameConfig&, const GameConfig&) = default;
};

/// Immutable board position. Row 0 is the top row.
class GameState {
 public:
  int height() const { return height_; }
  int width() const { return width_; }
  int to_move() const { return to_move_; }
  int move_count() const { return move_count_; }
  Outcome outcome() const { return outcome_; }
  bool terminal() const { return outcome_ != Outcome::kOngoing; }
  std::optional<int> winner() const;

  Cell at(int row, int col) const { return static_cast<Cell>(cells_[row * width_ + col]); }
  Cell cell(int index) const { return static_cast<Cell>(cells_[index]); }
  int num_cells() const { return height_ * width_; }

  friend bool operator==(const GameState&, const GameState&) = default;

 private:
  friend class GameRules;

  std::array<std::int8_t, kMaxCells> cells_{};
  std::int8_t height_ = 0;
  std::int8_t width_ = 0;
  std::int8_t to_move_ = 0;
  Outcome outcome_ = Outcome::kOngoing;
  std::int16_t move_count_ = 0;
};

struct StepResult {
  GameState next_state;
  bool terminal = false;
  std::optional<int> winner;
  std::array<double, kNumPlayers> rewards{0.0, 0.0};
};

/// 3 x H x W binary planes: empty cells, perspective player's chips, opponent chips.
struct EncodedState {
  int channels = 3;
  int height = 0;
  int width = 0;
  std::vector<double> data;

  double at(int plane, int row, int col) const {
    return data[(static_cast<std::size_t>(plane) * height + row) * width + col];
  }
};

class GameRules {
 public:
  explicit GameRules(GameConfig config);

  static GameRules connect4(int height = 6, int width = 7, int connect_n = 4) {
    return GameRules(GameConfig{height, width, connect_n, true});
  }
  static GameRules tic_tac_toe() { return GameRules(GameConfig{3, 3, 3, false}); }

  const GameConfig& config() const { return config_; }
  int height() const { return config_.height; }
  int width() const { return config_.width; }
  int num_actions() const { return num_actions_; }

  GameState initial_state() const;

  /// Throws std::logic_error on terminal states.
  std::vector<int> legal_actions(const GameState& state) const;
  std::vector<std::uint8_t> legal_mask(const GameState& state) const;
  bool is_legal(const GameState& state, int action) const;

  /// Throws std::invalid_argument for illegal actions.
  StepResult apply_action(const GameState& state, int action) const;

  /// Whether `player` would complete a line by taking `action`, regardless of whose turn it is.
  bool wins_with(const GameState& state, int action, int player) const;

  /// Rewards of a terminal state, indexed by player.
  std::array<double, kNumPlayers> rewards(const GameState& state) const;

  GameState mirror_state(const GameState& state) const;
  int mirror_action(int action) const;
  std::vector<double> mirror_policy(std::span<const double> policy) const;

  EncodedState encode_state(const GameState& state, int perspective) const;

  /// Builds a validated state from rows given top-down ('.', 'x' = player 0, 'o' = player 1).
  /// The player to move is derived from chip counts.
  GameState from_rows(std::span<const std::string_view> rows) const;

  /// One character per cell, rows top-down, newline-terminated.
  std::string render(const GameState& state) const;

  /// Compact text form "HxW:P:cells" with cells row-major top-down.
  std::string serialize(const GameState& state) const;
  GameState parse(std::string_view text) const;

  /// Binary form: height, width, to_move bytes followed by 2-bit cells, LSB first.
  std::vector<std::uint8_t> pack(const GameState& state) const;
  GameState unpack(std::span<const std::uint8_t> bytes) const;

  std::size_t packed_size() const { return 3 + (static_cast<std::size_t>(num_cells()) + 3) / 4; }

 private:
  int num_cells() const { return config_.height * config_.width; }
  GameState make_state(std::span<const std::int8_t> cells, int to_move) const;
  bool completes_line(const GameState& state, int row, int col) const;
  Outcome scan_outcome(const GameState& state) const;
  int landing_cell(const GameState& state, int action) const;

  GameConfig config_;
  int num_actions_ = 0;
};

}  // namespace brexit

#include <array>
#include <cstdio>

#include "quizforge/cli.hpp"

#ifdef _WIN32
#define popen _popen
#define pclose _pclose
#endif

namespace quizforge::cli {
namespace {

std::optional<std::string> capture(const char* command) {
  FILE* pipe = popen(command, "r");
  if (!pipe) return std::nullopt;
  std::string out;
  std::array<char, 4096> buf{};
  std::size_t got = 0;
  while ((got = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) out.append(buf.data(), got);
  if (pclose(pipe) != 0) return std::nullopt;
  return out;
}

}  // namespace

std::optional<std::string> read_clipboard() {
#if defined(_WIN32)
  const char* commands[] = {"powershell -NoProfile -Command Get-Clipboard"};
#elif defined(__APPLE__)
  const char* commands[] = {"pbpaste"};
#else
  const char* commands[] = {"wl-paste --no-newline 2>/dev/null", "xclip -selection clipboard -o 2>/dev/null",
                            "xsel --clipboard --output 2>/dev/null"};
#endif
  for (const char* c : commands) {
    if (auto text = capture(c)) return text;
  }
  return std::nullopt;
}

}  // namespace quizforge::cli

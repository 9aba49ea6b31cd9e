#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "quizforge/template.hpp"

// The quizforge command-line program as a library, so tests can drive it
// without spawning processes.
namespace quizforge::cli {

enum ExitCode : int { kOk = 0, kValidation = 1, kGeneration = 2, kIo = 3 };

// argv[0] is the program name.
int run(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err);

enum class PreviewFormat { html, text };

struct PreviewFields {
  std::string qtxt;
  std::string htxt;
  std::string atxt;
  std::string category;
  std::string quizname;
};

PreviewFields preview_fields(const quiz::QuizInstance& instance);

// What `preview` prints for one instance.
std::string render_preview(const PreviewFields& fields, PreviewFormat format);

// Readable text from quiz HTML: block elements become line breaks, table
// cells are tab separated, images show as "[image]".
std::string html_to_text(std::string_view html);

// Tries pbpaste, PowerShell Get-Clipboard, wl-paste, xclip and xsel in turn.
// Returns nullopt when none of them is available.
std::optional<std::string> read_clipboard();

}  // namespace quizforge::cli

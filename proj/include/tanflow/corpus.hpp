#pragma once

// Corpus files: a line-oriented list of typed declarations.
//
//   map NAME: Rn -> Rm = e1, ..., em [where COND, ...]
//   field NAME: Rn = e1, ..., en [where COND, ...]
//   form NAME: Rn deg k = (c) dx1^dx2 + ... [where COND, ...]
//   space NAME = builtin[(args)]
//   space NAME: Rn
//     constraint EXPR = 0 | EXPR >= 0 | EXPR > 0
//     rank r
//     plot NAME: Rd = e1, ..., en [where COND, ...]
//     ident NAME: PLOT -> PLOT = e1, ... [where ...] [; inverse e1, ... [where ...]]
//     certificate fiberwise_sum
//     base c1, ..., cn
//   end
//
// COND is `xi > c`, `xi < c` (box bounds) or `EXPR > 0`. The `map` keyword
// may be omitted. '#' starts a comment.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tanflow/cartan.hpp"
#include "tanflow/diffeology.hpp"
#include "tanflow/smooth_map.hpp"

namespace tanflow {

struct NamedForm {
  std::string name;
  DifferentialForm form;
};

struct SpaceDecl {
  std::string name;
  std::string builtin;               // empty for a user-declared space
  std::vector<int> int_args;         // euclidean(n), corner(n, k), pasta(n, r), gl(n)
  std::optional<Expr> squeeze;       // cusp(f)
  std::optional<DiffSpace> user;
  std::vector<std::string> certificate_names;

  [[nodiscard]] DiffSpace build() const;
};

struct Corpus {
  std::vector<SmoothMap> maps;
  std::vector<VectorField> fields;
  std::vector<NamedForm> forms;
  std::vector<SpaceDecl> spaces;

  [[nodiscard]] bool empty() const noexcept {
    return maps.empty() && fields.empty() && forms.empty() && spaces.empty();
  }
  [[nodiscard]] std::vector<SmoothMap> polynomial_maps() const;
  [[nodiscard]] CartanCorpus cartan() const;
  /// Throws UnknownSpace if no space has this name.
  [[nodiscard]] const SpaceDecl& space(const std::string& name) const;

  /// Appends another corpus; names must stay unique.
  void merge(Corpus other);
};

/// Throws ParseError (with line and column) on malformed text, and on a text
/// with no declarations.
[[nodiscard]] Corpus parse_corpus(std::string_view text);
[[nodiscard]] Corpus parse_corpus_file(const std::string& path);

/// Canonical text; parse_corpus(print_corpus(c)) prints identically.
[[nodiscard]] std::string print_corpus(const Corpus& corpus);

}  // namespace tanflow

#include <cctype>

#include "mvet/views.hpp"

namespace mvet {

namespace {

bool is_edge_punct(unsigned char c) {
  return std::ispunct(c) && c != '@';  // keep the @ENT: prefix intact
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t j = i;
    while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j]))) ++j;
    if (j > i) {
      std::string_view tok = text.substr(i, j - i);
      if (EntityCorpus::entity_id(tok)) {
        out.emplace_back(tok);
      } else {
        while (!tok.empty() && is_edge_punct(static_cast<unsigned char>(tok.front()))) {
          tok.remove_prefix(1);
        }
        while (!tok.empty() && is_edge_punct(static_cast<unsigned char>(tok.back()))) {
          tok.remove_suffix(1);
        }
        if (!tok.empty()) {
          std::string lower(tok);
          for (auto& c : lower) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
          out.push_back(std::move(lower));
        }
      }
    }
    i = j;
  }
  return out;
}

std::string strip_parenthetical(std::string_view title) {
  std::string kept;
  kept.reserve(title.size());
  int depth = 0;
  for (char c : title) {
    if (c == '(') {
      ++depth;
    } else if (c == ')') {
      if (depth > 0) --depth;
    } else if (depth == 0) {
      kept.push_back(c);
    }
  }
  // collapse runs of whitespace and trim
  std::string out;
  out.reserve(kept.size());
  bool in_space = true;
  for (char c : kept) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      in_space = true;
    } else {
      if (in_space && !out.empty()) out.push_back(' ');
      out.push_back(c);
      in_space = false;
    }
  }
  return out;
}

std::string EntityCorpus::entity_token(std::string_view id) {
  return std::string(kEntityPrefix) + std::string(id);
}

std::optional<std::string_view> EntityCorpus::entity_id(std::string_view token) {
  if (token.size() > kEntityPrefix.size() &&
      token.substr(0, kEntityPrefix.size()) == kEntityPrefix) {
    return token.substr(kEntityPrefix.size());
  }
  return std::nullopt;
}

}  // namespace mvet

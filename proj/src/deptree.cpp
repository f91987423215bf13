#include "desksmt/deptree.hpp"

#include <algorithm>
#include <functional>

#include "desksmt/error.hpp"
#include "desksmt/util.hpp"

namespace desksmt::deptree {

namespace {

std::string field_or_underscore(std::string_view f) {
  f = trim(f);
  return f.empty() ? std::string("_") : std::string(f);
}

bool is_regular_id(std::string_view id) {
  return !id.empty() &&
         std::all_of(id.begin(), id.end(), [](char c) { return c >= '0' && c <= '9'; });
}

struct PendingSentence {
  DepSentence s;
  std::size_t first_line = 0;
  std::vector<std::size_t> token_lines;
  bool has_tokens = false;
};

std::string where(std::string_view source, const DepSentence& s,
                  std::size_t line) {
  std::string w = std::string(source) + ":" + std::to_string(line);
  if (!s.sent_id.empty()) w += " (sent_id " + s.sent_id + ")";
  return w;
}

}  // namespace

Scheme parse_scheme(std::string_view name) {
  if (name == "PD" || name == "pd") return Scheme::kPD;
  if (name == "UD" || name == "ud") return Scheme::kUD;
  throw UsageError("unknown annotation scheme '" + std::string(name) + "'");
}

int DepSentence::root() const {
  for (const auto& t : tokens)
    if (t.head == 0) return t.id;
  return 0;
}

std::vector<std::vector<int>> DepSentence::children() const {
  std::vector<std::vector<int>> ch(tokens.size() + 1);
  for (const auto& t : tokens) ch[t.head].push_back(t.id);
  return ch;
}

std::vector<std::string> DepSentence::forms() const {
  std::vector<std::string> out;
  for (const auto& t : tokens) out.push_back(t.form);
  return out;
}

void validate_tree(const DepSentence& s, std::string_view source) {
  const int n = static_cast<int>(s.tokens.size());
  auto fail = [&](const std::string& msg) {
    std::string id = s.sent_id.empty() ? "" : " (sent_id " + s.sent_id + ")";
    throw DataError(std::string(source) + id + ": " + msg);
  };
  if (n == 0) fail("sentence has no tokens");
  int roots = 0;
  for (int i = 0; i < n; ++i) {
    const auto& t = s.tokens[i];
    if (t.id != i + 1) fail("token ids must be consecutive from 1");
    if (t.head < 0 || t.head > n)
      fail("token " + std::to_string(t.id) + " has dangling head " +
           std::to_string(t.head));
    if (t.head == t.id) fail("cycle: token " + std::to_string(t.id) + " heads itself");
    if (t.head == 0) ++roots;
  }
  if (roots == 0) fail("no root token");
  if (roots > 1) fail("multiple roots (" + std::to_string(roots) + ")");
  for (int i = 0; i < n; ++i) {
    int cur = s.tokens[i].id;
    for (int steps = 0; cur != 0; ++steps) {
      if (steps > n) fail("cycle through token " + std::to_string(i + 1));
      cur = s.tokens[cur - 1].head;
    }
  }
}

std::vector<DepSentence> parse_conllu(std::string_view text,
                                      std::string_view source) {
  std::vector<DepSentence> out;
  PendingSentence cur;
  bool open = false;
  auto finish = [&] {
    if (!open) return;
    if (cur.has_tokens) {
      validate_tree(cur.s, std::string(source) + ":" +
                               std::to_string(cur.first_line));
      out.push_back(std::move(cur.s));
    }
    cur = PendingSentence{};
    open = false;
  };

  std::size_t lineno = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t nl = text.find('\n', start);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view raw = text.substr(start, nl - start);
    start = nl + 1;
    ++lineno;
    if (!raw.empty() && raw.back() == '\r') raw.remove_suffix(1);
    std::string_view line = trim(raw);
    if (line.empty()) {
      finish();
      if (nl == text.size()) break;
      continue;
    }
    if (line.front() == '#') {
      if (open && cur.has_tokens) finish();
      if (!open) {
        open = true;
        cur.first_line = lineno;
      }
      std::string_view body = trim(line.substr(1));
      if (starts_with(body, "sent_id")) {
        auto eq = body.find('=');
        cur.s.sent_id = std::string(trim(eq == std::string_view::npos
                                             ? body.substr(7)
                                             : body.substr(eq + 1)));
      } else if (starts_with(body, "text")) {
        auto eq = body.find('=');
        cur.s.text = std::string(trim(eq == std::string_view::npos
                                          ? body.substr(4)
                                          : body.substr(eq + 1)));
      } else {
        cur.s.comments.emplace_back(body);
      }
      if (nl == text.size()) break;
      continue;
    }
    if (!open) {
      open = true;
      cur.first_line = lineno;
    }
    // Trailing tabs are layout, not columns.
    std::string_view row = raw;
    while (!row.empty() && (row.back() == '\t' || row.back() == ' '))
      row.remove_suffix(1);
    auto cols = split_on(row, "\t");
    if (cols.size() != 10)
      throw DataError(where(source, cur.s, lineno) + ": expected 10 columns, got " +
                      std::to_string(cols.size()));
    std::string_view id = trim(cols[0]);
    if (!is_regular_id(id)) {
      if (id.find('-') != std::string_view::npos ||
          id.find('.') != std::string_view::npos) {
        cur.s.passthrough.push_back({cur.s.tokens.size(), std::string(row)});
        if (nl == text.size()) break;
        continue;
      }
      throw DataError(where(source, cur.s, lineno) + ": bad token id '" +
                      std::string(id) + "'");
    }
    DepToken t;
    try {
      t.id = static_cast<int>(parse_int(id, "token id"));
      t.form = std::string(trim(cols[1]));
      if (t.form.empty()) throw DataError("empty FORM");
      t.lemma = field_or_underscore(cols[2]);
      t.upos = field_or_underscore(cols[3]);
      t.xpos = field_or_underscore(cols[4]);
      std::string feats = field_or_underscore(cols[5]);
      if (feats != "_") {
        for (auto& f : split_on(feats, "|"))
          for (auto& g : split_ws(f)) t.feats.push_back(g);
      }
      std::string_view head = trim(cols[6]);
      if (head.empty() || head == "_") throw DataError("missing HEAD");
      t.head = static_cast<int>(parse_int(head, "head"));
      t.deprel = std::string(trim(cols[7]));
      if (t.deprel.empty()) throw DataError("missing DEPREL");
      t.deps = field_or_underscore(cols[8]);
      t.misc = field_or_underscore(cols[9]);
    } catch (const DataError& e) {
      throw DataError(where(source, cur.s, lineno) + ": " + e.what());
    }
    if (t.id != static_cast<int>(cur.s.tokens.size()) + 1)
      throw DataError(where(source, cur.s, lineno) +
                      ": token ids must be consecutive from 1");
    cur.s.tokens.push_back(std::move(t));
    cur.token_lines.push_back(lineno);
    cur.has_tokens = true;
    if (nl == text.size()) break;
  }
  finish();
  return out;
}

std::string write_conllu(const std::vector<DepSentence>& sentences) {
  std::string out;
  for (const auto& s : sentences) {
    if (!s.sent_id.empty()) out += "# sent_id = " + s.sent_id + "\n";
    if (!s.text.empty()) out += "# text = " + s.text + "\n";
    for (const auto& c : s.comments) out += "# " + c + "\n";
    std::size_t pt = 0;
    for (std::size_t i = 0; i <= s.tokens.size(); ++i) {
      while (pt < s.passthrough.size() && s.passthrough[pt].before == i)
        out += s.passthrough[pt++].line + "\n";
      if (i == s.tokens.size()) break;
      const auto& t = s.tokens[i];
      std::string feats = t.feats.empty() ? "_" : join(t.feats, "|");
      out += std::to_string(t.id) + "\t" + t.form + "\t" + t.lemma + "\t" +
             t.upos + "\t" + t.xpos + "\t" + feats + "\t" +
             std::to_string(t.head) + "\t" + t.deprel + "\t" + t.deps + "\t" +
             t.misc + "\n";
    }
    out += "\n";
  }
  return out;
}

std::optional<std::pair<Arc, Arc>> find_crossing(const DepSentence& s) {
  std::vector<Arc> arcs;
  for (const auto& t : s.tokens) arcs.push_back({t.id, t.head});
  auto inside = [](int x, int lo, int hi) { return lo < x && x < hi; };
  for (std::size_t a = 0; a < arcs.size(); ++a) {
    int lo = std::min(arcs[a].dependent, arcs[a].head);
    int hi = std::max(arcs[a].dependent, arcs[a].head);
    for (std::size_t b = a + 1; b < arcs.size(); ++b) {
      int k = arcs[b].dependent, l = arcs[b].head;
      if (k == lo || k == hi || l == lo || l == hi) continue;
      if (inside(k, lo, hi) != inside(l, lo, hi))
        return std::make_pair(arcs[a], arcs[b]);
    }
  }
  return std::nullopt;
}

bool is_projective(const DepSentence& s) { return !find_crossing(s); }

std::string xml_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string xml_unescape(std::string_view s) {
  static const std::pair<std::string_view, char> kEntities[] = {
      {"&amp;", '&'}, {"&lt;", '<'}, {"&gt;", '>'}, {"&quot;", '"'},
      {"&apos;", '\''}};
  std::string out;
  for (std::size_t i = 0; i < s.size();) {
    bool matched = false;
    if (s[i] == '&') {
      for (auto [ent, ch] : kEntities) {
        if (s.substr(i, ent.size()) == ent) {
          out += ch;
          i += ent.size();
          matched = true;
          break;
        }
      }
      if (!matched)
        throw DataError("unknown XML entity at offset " + std::to_string(i));
    } else {
      out += s[i++];
    }
  }
  return out;
}

std::string to_nested_tree(const DepSentence& s) {
  validate_tree(s);
  if (auto cross = find_crossing(s)) {
    auto [a, b] = *cross;
    throw DataError("non-projective tree" +
                    (s.sent_id.empty() ? std::string() : " (sent_id " + s.sent_id + ")") +
                    ": arcs " + std::to_string(a.dependent) + "->" +
                    std::to_string(a.head) + " and " +
                    std::to_string(b.dependent) + "->" +
                    std::to_string(b.head) + " cross");
  }
  const auto ch = s.children();
  std::string out;
  std::function<void(int, bool)> emit = [&](int id, bool is_root) {
    const auto& t = s.tokens[id - 1];
    out += "<tree label=\"" + xml_escape(is_root ? "root" : t.deprel) + "\">";
    bool head_done = false;
    auto emit_head = [&] {
      const std::string& tag = t.xpos != "_" ? t.xpos : t.upos;
      out += "<tree label=\"" + xml_escape(tag) + "\">" + xml_escape(t.form) +
             "</tree>";
      head_done = true;
    };
    for (int c : ch[id]) {
      if (!head_done && c > id) emit_head();
      emit(c, false);
    }
    if (!head_done) emit_head();
    out += "</tree>";
  };
  out += "<tree label=\"sent\">";
  emit(s.root(), true);
  out += "</tree>";
  return out;
}

namespace {

class NestedTreeReader {
 public:
  explicit NestedTreeReader(std::string_view text) : text_(text) {}

  BracketTree read() {
    skip_ws();
    BracketTree t = node();
    skip_ws();
    if (pos_ != text_.size()) fail("trailing characters");
    return t;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) {
    throw DataError("nested tree: " + msg + " at offset " + std::to_string(pos_));
  }
  void skip_ws() {
    while (pos_ < text_.size() &&
           (text_[pos_] == ' ' || text_[pos_] == '\n' || text_[pos_] == '\t' ||
            text_[pos_] == '\r'))
      ++pos_;
  }
  void expect(std::string_view lit) {
    if (text_.substr(pos_, lit.size()) != lit)
      fail("expected '" + std::string(lit) + "'");
    pos_ += lit.size();
  }
  BracketTree node() {
    expect("<tree");
    skip_ws();
    expect("label=\"");
    auto q = text_.find('"', pos_);
    if (q == std::string_view::npos) fail("unterminated label");
    BracketTree t;
    t.label = xml_unescape(text_.substr(pos_, q - pos_));
    pos_ = q + 1;
    skip_ws();
    if (text_.substr(pos_, 2) == "/>") {
      pos_ += 2;
      return t;
    }
    expect(">");
    // Either a word (leaf) or a sequence of child nodes.
    if (text_.substr(pos_, 5) == "<tree") {
      while (text_.substr(pos_, 5) == "<tree") {
        t.children.push_back(node());
        skip_ws();
      }
    } else {
      auto lt = text_.find('<', pos_);
      if (lt == std::string_view::npos) fail("unterminated leaf");
      t.word = xml_unescape(trim(text_.substr(pos_, lt - pos_)));
      if (t.word.empty()) fail("empty node");
      pos_ = lt;
    }
    expect("</tree>");
    return t;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace

BracketTree parse_nested_tree(std::string_view text) {
  return NestedTreeReader(text).read();
}

std::string write_nested_tree(const BracketTree& t) {
  if (t.is_variable()) return "<tree label=\"" + xml_escape(t.label) + "\"/>";
  std::string out = "<tree label=\"" + xml_escape(t.label) + "\">";
  if (t.children.empty()) {
    out += xml_escape(t.word);
  } else {
    for (const auto& c : t.children) out += write_nested_tree(c);
  }
  out += "</tree>";
  return out;
}

std::vector<std::string> label_sequence(const BracketTree& t) {
  std::vector<std::string> out;
  std::function<void(const BracketTree&)> walk = [&](const BracketTree& n) {
    out.push_back(n.label);
    for (const auto& c : n.children) walk(c);
  };
  walk(t);
  return out;
}

DepSentence nested_tree_to_dep(const BracketTree& t) {
  const BracketTree* top = &t;
  if (t.label == "sent") {
    if (t.children.size() != 1)
      throw DataError("nested tree: 'sent' must hold exactly one root node");
    top = &t.children.front();
  }
  DepSentence s;
  std::function<int(const BracketTree&, int)> walk =
      [&](const BracketTree& n, int parent) -> int {
    if (n.is_leaf()) throw DataError("nested tree: unexpected bare leaf");
    if (n.is_variable()) throw DataError("nested tree: variable '" + n.label + "' in a sentence tree");
    int leaves = 0;
    for (const auto& c : n.children) leaves += c.is_leaf();
    if (leaves != 1)
      throw DataError("nested tree: node '" + n.label + "' must hold exactly one head word, has " +
                      std::to_string(leaves));
    int my_id = 0;
    // Dependents left of the head get their head id once it is known.
    std::vector<std::size_t> child_token_index;
    for (const auto& c : n.children) {
      if (c.is_leaf()) {
        DepToken tok;
        tok.id = static_cast<int>(s.tokens.size()) + 1;
        tok.form = c.word;
        tok.xpos = c.label;
        tok.head = parent;
        tok.deprel = n.label;
        s.tokens.push_back(tok);
        my_id = tok.id;
        for (std::size_t idx : child_token_index) s.tokens[idx].head = my_id;
        child_token_index.clear();
      } else {
        int child_id = walk(c, my_id);
        if (my_id == 0) child_token_index.push_back(static_cast<std::size_t>(child_id - 1));
      }
    }
    return my_id;
  };
  walk(*top, 0);
  if (!s.tokens.empty()) s.tokens[s.root() - 1].deprel = "root";
  validate_tree(s);
  return s;
}

bool LabelInventory::contains(std::string_view label) const {
  auto colon = label.find(':');
  std::string base(label.substr(0, colon));
  return labels.count(std::string(label)) || labels.count(base);
}

const LabelInventory& pd_inventory() {
  static const LabelInventory inv{
      Scheme::kPD,
      {"k1",          "k1s",         "pk1",        "jk1",      "mk1",
       "k2",          "k2p",         "k2g",        "k2s",      "k3",
       "k4",          "k4a",         "k5",         "k5prk",    "k7t",
       "k7p",         "k7",          "k7a",        "k*u",      "r6",
       "r6-k1",       "r6-k2",       "r6v",        "adv",      "sent-adv",
       "rd",          "rh",          "rt",         "ras-k*",   "ras-neg",
       "rs",          "rsp",         "rad",        "nmod__relc", "jjmod__relc",
       "rbmod__relc", "nmod",        "nmod_emph",  "vmod",     "jjmod",
       "pof",         "pof-phrv",    "ccof",       "fragof",   "enm",
       "rsym",        "psp__cl",     "dummy-sub"}};
  return inv;
}

const LabelInventory& ud_inventory() {
  static const LabelInventory inv{
      Scheme::kUD,
      {"nsubj",     "obj",      "iobj",      "csubj",    "ccomp",
       "xcomp",     "obl",      "vocative",  "expl",     "dislocated",
       "advcl",     "advmod",   "discourse", "aux",      "cop",
       "mark",      "nmod",     "appos",     "nummod",   "acl",
       "amod",      "det",      "clf",       "case",     "conj",
       "cc",        "fixed",    "flat",      "compound", "list",
       "parataxis", "orphan",   "goeswith",  "reparandum", "punct",
       "root",      "dep"}};
  return inv;
}

const LabelInventory& inventory(Scheme s) {
  return s == Scheme::kPD ? pd_inventory() : ud_inventory();
}

std::set<std::string> map_pd_to_ud(std::string_view pd_label) {
  if (!pd_inventory().contains(pd_label))
    throw DataError("'" + std::string(pd_label) + "' is not a PD label");
  static const std::map<std::string, std::set<std::string>, std::less<>> kMap = {
      {"k2", {"ccomp", "dobj", "xcomp"}},
      {"k3", {"nmod"}},
      {"k7p", {"nmod"}},
      {"k7t", {"nmod"}},
      {"r6", {"nmod"}},
      {"k1", {"nsubj"}},
      {"k4a", {"nsubj"}},
      {"pk1", {"nsubj"}},
  };
  if (auto it = kMap.find(pd_label); it != kMap.end()) return it->second;
  return {};
}

SchemeStats scheme_stats(const std::vector<DepSentence>& sentences,
                         Scheme scheme) {
  SchemeStats st;
  const auto& inv = inventory(scheme);
  for (const auto& s : sentences) {
    for (const auto& t : s.tokens) {
      ++st.total;
      if (inv.contains(t.deprel) || t.deprel == "root") {
        ++st.counts[t.deprel];
      } else {
        ++st.counts["OTHER"];
        st.warnings.push_back((s.sent_id.empty() ? std::string("?") : s.sent_id) +
                              ":" + std::to_string(t.id) + ": '" + t.deprel +
                              "' not in inventory");
      }
    }
  }
  return st;
}

}  // namespace desksmt::deptree

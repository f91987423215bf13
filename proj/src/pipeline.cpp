#include "desksmt/pipeline.hpp"

#include <algorithm>
#include <filesystem>
#include <set>

#include "desksmt/error.hpp"
#include "desksmt/eval.hpp"
#include "desksmt/tune.hpp"

namespace desksmt::pipeline {

namespace fs = std::filesystem;
using decoder::FeatureWeights;
using decoder::Translation;

DecoderKind parse_decoder_kind(std::string_view name) {
  if (name == "phrase") return DecoderKind::kPhrase;
  if (name == "hier" || name == "hierarchical") return DecoderKind::kHier;
  if (name == "tree") return DecoderKind::kTree;
  throw UsageError("unknown decoder kind '" + std::string(name) + "' (phrase, hier, tree)");
}

std::string_view decoder_kind_name(DecoderKind k) {
  switch (k) {
    case DecoderKind::kPhrase: return "phrase";
    case DecoderKind::kHier: return "hier";
    case DecoderKind::kTree: return "tree";
  }
  return "phrase";
}

lm::DiscountMode parse_discount_mode(std::string_view name, double fixed) {
  if (name == "kn" || name == "counts_of_counts") return lm::DiscountMode::from_counts();
  if (name == "fixed") return lm::DiscountMode::fixed_value(fixed);
  throw UsageError("unknown discount mode '" + std::string(name) + "' (counts_of_counts, fixed)");
}

// --- Translator -------------------------------------------------------------

Translator::Translator(DecodeSettings settings, lm::NGramModel lm)
    : settings_(settings), lm_(std::move(lm)) {}

void Translator::set_phrase_table(phrasetab::PhraseTable t,
                                  std::optional<phrasetab::ReorderingTable> reordering) {
  phrases_ = std::make_unique<phrasetab::PhraseTable>(std::move(t));
  reordering_.reset();
  if (reordering) reordering_ = std::make_unique<phrasetab::ReorderingTable>(std::move(*reordering));
  phrase_models_ = std::make_unique<decoder::PhraseModels>(*phrases_, lm_, reordering_.get());
}

void Translator::set_rule_table(ruletab::RuleTable t) {
  rules_ = std::make_unique<ruletab::RuleTable>(std::move(t));
  chart_models_ = std::make_unique<decoder::ChartModels>(*rules_, lm_, settings_.max_span);
}

void Translator::set_tree_rules(ruletab::TreeRuleTable t) {
  tree_rules_ = std::make_unique<ruletab::TreeRuleTable>(std::move(t));
  tree_models_ = std::make_unique<decoder::TreeModels>(*tree_rules_, lm_);
}

std::vector<Translation> Translator::translate(const Tokens& sentence, const deptree::DepSentence* tree,
                                               const FeatureWeights& w, int nbest) const {
  switch (settings_.kind) {
    case DecoderKind::kPhrase: {
      if (!phrase_models_) throw UsageError("phrase decoding needs a phrase table");
      if (sentence.empty()) return {Translation{}};
      decoder::PhraseConfig c;
      c.stack_size = settings_.stack_size;
      c.distortion_limit = settings_.distortion_limit;
      c.table_limit = settings_.table_limit;
      c.max_phrase_len = settings_.max_phrase_len;
      c.nbest = nbest;
      return decoder::decode_phrase(sentence, *phrase_models_, w, c);
    }
    case DecoderKind::kHier: {
      if (!chart_models_) throw UsageError("hierarchical decoding needs a rule table");
      if (sentence.empty()) return {Translation{}};
      decoder::ChartConfig c;
      c.cell_beam = settings_.cell_beam;
      c.nbest = nbest;
      return decoder::decode_chart(sentence, *chart_models_, w, c);
    }
    case DecoderKind::kTree: {
      if (!tree_models_) throw UsageError("tree decoding needs a tree rule table");
      if (!tree) throw UsageError("tree decoding needs a dependency tree per sentence");
      if (tree->tokens.empty()) return {Translation{}};
      decoder::TreeConfig c;
      c.k_best_per_node = settings_.k_best_per_node;
      c.nbest = nbest;
      return decoder::decode_tree(*tree, *tree_models_, w, c);
    }
  }
  return {};
}

std::vector<std::vector<Translation>> Translator::translate_all(
    const std::vector<Tokens>& sentences, const std::vector<deptree::DepSentence>* trees,
    const FeatureWeights& w, int nbest, int jobs) const {
  if (settings_.kind == DecoderKind::kTree && (!trees || trees->size() != sentences.size()))
    throw DataError("tree decoding needs one dependency tree per input sentence");
  std::vector<std::vector<Translation>> out(sentences.size());
  for_each_shard(sentences.size(), 1, jobs, [&](std::size_t, std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      const std::string where = "sentence " + std::to_string(i + 1) + ": ";
      try {
        out[i] = translate(sentences[i], trees ? &(*trees)[i] : nullptr, w, nbest);
      } catch (const UsageError& err) {
        throw UsageError(where + err.what());
      } catch (const DataError& err) {
        throw DataError(where + err.what());
      } catch (const InvariantError& err) {
        throw InvariantError(where + err.what());
      }
    }
  });
  return out;
}

// --- configuration ----------------------------------------------------------

namespace {

bool parse_bool(std::string_view v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw UsageError("expected a boolean, got '" + std::string(v) + "'");
}

int parse_int_value(std::string_view v, const char* what) {
  return static_cast<int>(parse_int(v, what));
}

std::string resolve(const std::string& base, std::string_view p) {
  if (p.empty()) return {};
  fs::path path{std::string(p)};
  if (path.is_relative()) path = fs::path(base) / path;
  return path.lexically_normal().string();
}

}  // namespace

std::string PipelineConfig::canonical() const {
  std::map<std::string, std::string> kv;
  kv["corpus.source_lang"] = profile_name(source_lang);
  kv["corpus.target_lang"] = profile_name(target_lang);
  kv["corpus.tokenize"] = tokenize ? "true" : "false";
  kv["corpus.max_len"] = std::to_string(max_len);
  kv["lm.order"] = std::to_string(lm_order);
  kv["lm.discount_mode"] = discount.counts_of_counts ? "counts_of_counts" : "fixed";
  kv["lm.fixed_discount"] = format_g(discount.fixed, 17);
  kv["align.iterations"] = std::to_string(align_iterations);
  kv["align.model"] = std::to_string(align_model);
  kv["align.symmetrization"] = heuristic_name(symmetrization);
  kv["phrase.max_len"] = std::to_string(phrase_max_len);
  kv["phrase.table_limit"] = std::to_string(decode.table_limit);
  kv["reorder.enabled"] = reorder_enabled ? "true" : "false";
  kv["reorder.orientation_set"] = orientation_set == phrasetab::OrientationSet::kMsd ? "msd" : "mslr";
  kv["reorder.bidirectional"] = reorder_bidirectional ? "true" : "false";
  kv["hier.max_span"] = std::to_string(decode.max_span);
  kv["decoder.kind"] = decoder_kind_name(decode.kind);
  kv["decoder.stack_size"] = std::to_string(decode.stack_size);
  kv["decoder.distortion_limit"] = std::to_string(decode.distortion_limit);
  kv["decoder.cell_beam"] = std::to_string(decode.cell_beam);
  kv["decoder.k_best_per_node"] = std::to_string(decode.k_best_per_node);
  kv["decoder.nbest"] = std::to_string(nbest);
  kv["tune.enabled"] = tune_enabled ? "true" : "false";
  kv["tune.iterations"] = std::to_string(tune_iterations);
  kv["tune.nbest"] = std::to_string(tune_nbest);
  kv["tune.random_restarts"] = std::to_string(tune_random_restarts);
  kv["eval.metrics"] = join(metrics, ",");
  std::string out;
  for (const auto& [k, v] : kv) out += k + " = " + v + "\n";
  return out;
}

PipelineConfig parse_config(std::string_view text, std::string_view source, const std::string& base_dir) {
  PipelineConfig c;
  const std::string src(source);
  std::size_t n = 0;
  std::set<std::string> seen;
  for (const auto& raw : split_on(text, "\n")) {
    ++n;
    auto line = trim(raw);
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = trim(line.substr(0, hash));
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string_view::npos) throw DataError(src, n, "expected 'section.key = value'");
    const std::string key(trim(line.substr(0, eq)));
    const std::string v(trim(line.substr(eq + 1)));
    if (!seen.insert(key).second) throw DataError(src, n, "duplicate key '" + key + "'");
    try {
      if (key == "paths.train_source") c.train_source = resolve(base_dir, v);
      else if (key == "paths.train_target") c.train_target = resolve(base_dir, v);
      else if (key == "paths.dev_source") c.dev_source = resolve(base_dir, v);
      else if (key == "paths.dev_target") c.dev_target = resolve(base_dir, v);
      else if (key == "paths.test_source") c.test_source = resolve(base_dir, v);
      else if (key == "paths.test_target") c.test_target = resolve(base_dir, v);
      else if (key == "paths.train_trees") c.train_trees = resolve(base_dir, v);
      else if (key == "paths.dev_trees") c.dev_trees = resolve(base_dir, v);
      else if (key == "paths.test_trees") c.test_trees = resolve(base_dir, v);
      else if (key == "paths.model_dir") c.model_dir = resolve(base_dir, v);
      else if (key == "corpus.source_lang") c.source_lang = corpus::parse_profile(v);
      else if (key == "corpus.target_lang") c.target_lang = corpus::parse_profile(v);
      else if (key == "corpus.tokenize") c.tokenize = parse_bool(v);
      else if (key == "corpus.max_len") c.max_len = static_cast<std::size_t>(parse_int_value(v, "max_len"));
      else if (key == "lm.order") c.lm_order = parse_int_value(v, "lm.order");
      else if (key == "lm.discount_mode") c.discount = parse_discount_mode(v, c.discount.fixed);
      else if (key == "lm.fixed_discount") c.discount.fixed = parse_double(v, "lm.fixed_discount");
      else if (key == "align.iterations") c.align_iterations = parse_int_value(v, "align.iterations");
      else if (key == "align.model") {
        c.align_model = parse_int_value(v, "align.model");
        if (c.align_model != 1 && c.align_model != 2) throw UsageError("align.model must be 1 or 2");
      } else if (key == "align.symmetrization") c.symmetrization = align::parse_heuristic(v);
      else if (key == "phrase.max_len") {
        c.phrase_max_len = parse_int_value(v, "phrase.max_len");
        c.decode.max_phrase_len = c.phrase_max_len;
      } else if (key == "phrase.table_limit") c.decode.table_limit = parse_int_value(v, "phrase.table_limit");
      else if (key == "reorder.enabled") c.reorder_enabled = parse_bool(v);
      else if (key == "reorder.orientation_set") c.orientation_set = phrasetab::parse_orientation_set(v);
      else if (key == "reorder.bidirectional") c.reorder_bidirectional = parse_bool(v);
      else if (key == "hier.max_span") c.decode.max_span = parse_int_value(v, "hier.max_span");
      else if (key == "decoder.kind") c.decode.kind = parse_decoder_kind(v);
      else if (key == "decoder.stack_size") c.decode.stack_size = parse_int_value(v, "decoder.stack_size");
      else if (key == "decoder.distortion_limit")
        c.decode.distortion_limit = parse_int_value(v, "decoder.distortion_limit");
      else if (key == "decoder.cell_beam") c.decode.cell_beam = parse_int_value(v, "decoder.cell_beam");
      else if (key == "decoder.k_best_per_node")
        c.decode.k_best_per_node = parse_int_value(v, "decoder.k_best_per_node");
      else if (key == "decoder.nbest") c.nbest = parse_int_value(v, "decoder.nbest");
      else if (key == "tune.enabled") c.tune_enabled = parse_bool(v);
      else if (key == "tune.iterations") c.tune_iterations = parse_int_value(v, "tune.iterations");
      else if (key == "tune.nbest") c.tune_nbest = parse_int_value(v, "tune.nbest");
      else if (key == "tune.random_restarts") c.tune_random_restarts = parse_int_value(v, "tune.random_restarts");
      else if (key == "eval.metrics") {
        c.metrics.clear();
        for (const auto& m : split_on(v, ",")) {
          std::string name(trim(m));
          if (name != "bleu" && name != "wer" && name != "prf" && name != "meteor")
            throw UsageError("unknown metric '" + name + "' (bleu, wer, prf, meteor)");
          c.metrics.push_back(name);
        }
      } else {
        throw UsageError("unknown key '" + key + "'");
      }
    } catch (const Error& e) {
      throw DataError(src, n, e.what());
    }
  }
  if (c.lm_order < 2) throw DataError(src + ": lm.order must be at least 2");
  return c;
}

void validate_config(const PipelineConfig& c) {
  auto need = [](const std::string& p, const char* key) {
    if (p.empty()) throw UsageError(std::string("configuration lacks ") + key);
    if (!fs::exists(p)) throw DataError(std::string(key) + ": no such file '" + p + "'");
  };
  need(c.train_source, "paths.train_source");
  need(c.train_target, "paths.train_target");
  need(c.test_source, "paths.test_source");
  need(c.test_target, "paths.test_target");
  if (c.tune_enabled) {
    need(c.dev_source, "paths.dev_source");
    need(c.dev_target, "paths.dev_target");
  }
  if (c.decode.kind == DecoderKind::kTree) {
    need(c.train_trees, "paths.train_trees");
    need(c.test_trees, "paths.test_trees");
    if (c.tune_enabled) need(c.dev_trees, "paths.dev_trees");
  }
  if (c.model_dir.empty()) throw UsageError("configuration lacks paths.model_dir");
}

std::string config_hash(const PipelineConfig& c) { return hex64(fnv1a(c.canonical())); }

std::vector<Tokens> load_sentences(const std::string& path, bool tokenize, corpus::LangProfile profile) {
  const std::string text = read_file(path);
  if (tokenize) return corpus::tokenize(text, profile);
  std::vector<Tokens> out;
  auto lines = split_on(text, "\n");
  if (!lines.empty() && lines.back().empty()) lines.pop_back();
  for (const auto& l : lines) out.push_back(split_ws(l));
  return out;
}

// --- pipeline ---------------------------------------------------------------

namespace {

struct Manifest {
  std::string dir;
  std::vector<std::string> lines;

  void write(const std::string& name, const std::string& format, const std::string& content) {
    write_file((fs::path(dir) / name).string(), content);
    lines.push_back("artifact\t" + name + "\t" + format + "\t" + hex64(fnv1a(content)));
  }
  std::string read(const std::string& name) const { return read_file((fs::path(dir) / name).string()); }
};

std::vector<deptree::DepSentence> load_trees(const std::string& path) {
  return deptree::parse_conllu(read_file(path), path);
}

std::vector<Tokens> tree_forms(const std::vector<deptree::DepSentence>& trees) {
  std::vector<Tokens> out;
  for (const auto& t : trees) out.push_back(t.forms());
  return out;
}

std::string report_text(const eval::SystemScores& s, const std::vector<std::string>& metrics) {
  auto has = [&](const char* m) { return std::find(metrics.begin(), metrics.end(), m) != metrics.end(); };
  std::string out = "sentences\t" + std::to_string(s.sentences) + "\n";
  if (has("bleu")) {
    out += "bleu\t" + format_g(s.bleu.score, 6) + "\n";
    for (std::size_t n = 0; n < s.bleu.precisions.size(); ++n)
      out += "bleu_p" + std::to_string(n + 1) + "\t" + format_g(s.bleu.precisions[n], 6) + "\n";
    out += "bleu_bp\t" + format_g(s.bleu.brevity_penalty, 6) + "\n";
  }
  if (has("wer")) out += "wer\t" + format_g(s.wer, 6) + "\n";
  if (has("prf")) {
    out += "precision\t" + format_g(s.precision, 6) + "\n";
    out += "recall\t" + format_g(s.recall, 6) + "\n";
    out += "f\t" + format_g(s.f, 6) + "\n";
  }
  if (has("meteor")) out += "meteor\t" + format_g(s.meteor, 6) + "\n";
  return out;
}

std::vector<Tokens> best_of(const std::vector<std::vector<Translation>>& nb) {
  std::vector<Tokens> out;
  for (const auto& l : nb) out.push_back(l.empty() ? Tokens{} : l.front().target);
  return out;
}

}  // namespace

void run_pipeline(const PipelineConfig& c, const RunOptions& opt, std::ostream& log) {
  validate_config(c);
  fs::create_directories(c.model_dir);
  Manifest man{c.model_dir, {}};
  const bool tree_kind = c.decode.kind == DecoderKind::kTree;

  // training data
  log << "[pipeline] reading training data\n";
  std::vector<deptree::DepSentence> train_trees;
  std::vector<Tokens> train_src = tree_kind ? tree_forms(train_trees = load_trees(c.train_trees))
                                            : load_sentences(c.train_source, c.tokenize, c.source_lang);
  std::vector<Tokens> train_tgt = load_sentences(c.train_target, c.tokenize, c.target_lang);
  if (train_src.size() != train_tgt.size())
    throw DataError("training corpus has " + std::to_string(train_src.size()) + " source and " +
                    std::to_string(train_tgt.size()) + " target sentences");
  std::vector<corpus::SentencePair> pairs;
  std::vector<deptree::DepSentence> kept_trees;
  for (std::size_t i = 0; i < train_src.size(); ++i) {
    const auto& s = train_src[i];
    const auto& t = train_tgt[i];
    if (s.empty() || t.empty() || s.size() > c.max_len || t.size() > c.max_len) continue;
    pairs.push_back({s, t, std::nullopt});
    if (tree_kind) kept_trees.push_back(train_trees[i]);
  }
  if (pairs.empty()) throw DataError("no training pairs survive cleaning");
  {
    std::vector<Tokens> s, t;
    for (const auto& p : pairs) {
      s.push_back(p.source);
      t.push_back(p.target);
    }
    man.write("train.clean.src", "tokenized-text", corpus::write_corpus(s));
    man.write("train.clean.tgt", "tokenized-text", corpus::write_corpus(t));
  }

  // language model
  log << "[pipeline] training " << c.lm_order << "-gram LM on " << pairs.size() << " sentences\n";
  {
    std::vector<Tokens> tgt;
    for (const auto& p : pairs) tgt.push_back(p.target);
    man.write("lm.arpa", "arpa", lm::write_arpa(lm::train_lm(tgt, c.lm_order, c.discount, opt.jobs)));
  }

  // word alignment
  log << "[pipeline] aligning (IBM" << c.align_model << ", " << heuristic_name(c.symmetrization) << ")\n";
  align::AlignerOptions ao;
  ao.ibm1_iterations = c.align_iterations;
  ao.ibm2_iterations = c.align_model == 2 ? c.align_iterations : 0;
  ao.heuristic = c.symmetrization;
  ao.jobs = opt.jobs;
  auto wa = align::align_corpus(pairs, ao);
  man.write("aligned." + std::string(heuristic_name(c.symmetrization)), "pharaoh-alignment",
            align::write_alignments(wa.links));
  man.write("lex.forward", "ttable-v1", align::write_ttable(wa.forward));
  man.write("lex.backward", "ttable-v1", align::write_ttable(wa.backward));

  // translation model, re-read from disk so decoding sees exactly the artifacts
  lm::NGramModel lm_model = lm::read_arpa(man.read("lm.arpa"));
  auto translator = std::make_unique<Translator>(c.decode, std::move(lm_model));
  switch (c.decode.kind) {
    case DecoderKind::kPhrase: {
      log << "[pipeline] extracting phrases\n";
      phrasetab::ExtractOptions eo;
      eo.max_phrase_len = c.phrase_max_len;
      eo.jobs = opt.jobs;
      man.write("phrase-table", "phrase-table-v1",
                phrasetab::write_phrase_table(phrasetab::build_phrase_table(pairs, wa.links, wa.forward, wa.backward, eo)));
      std::optional<phrasetab::ReorderingTable> reo;
      if (c.reorder_enabled) {
        phrasetab::ReorderingOptions ro;
        ro.set = c.orientation_set;
        ro.bidirectional = c.reorder_bidirectional;
        ro.max_phrase_len = c.phrase_max_len;
        const std::string fmt = std::string("reordering-") +
                                (c.orientation_set == phrasetab::OrientationSet::kMsd ? "msd" : "mslr") +
                                (c.reorder_bidirectional ? "-bidirectional" : "-forward");
        man.write("reordering-table", fmt,
                  phrasetab::write_reordering_table(phrasetab::extract_reordering(pairs, wa.links, ro)));
        reo = phrasetab::read_reordering_table(man.read("reordering-table"), c.orientation_set,
                                               c.reorder_bidirectional);
      }
      translator->set_phrase_table(phrasetab::read_phrase_table(man.read("phrase-table"), "phrase-table"),
                                   std::move(reo));
      break;
    }
    case DecoderKind::kHier: {
      log << "[pipeline] extracting hierarchical rules\n";
      ruletab::HierConfig hc;
      hc.max_span = c.decode.max_span;
      hc.jobs = opt.jobs;
      man.write("rule-table", "rule-table-v1",
                ruletab::write_rule_table(ruletab::build_rule_table(pairs, wa.links, wa.forward, wa.backward, hc)));
      translator->set_rule_table(ruletab::read_rule_table(man.read("rule-table"), "rule-table"));
      break;
    }
    case DecoderKind::kTree: {
      log << "[pipeline] extracting tree-to-string rules\n";
      std::vector<Tokens> tgts;
      for (const auto& p : pairs) tgts.push_back(p.target);
      auto table = ruletab::build_tree_rule_table(kept_trees, tgts, wa.links);
      for (const auto& w : table.warnings) log << "[pipeline] warning: " << w << "\n";
      man.write("tree-rules", "tree-rules-v1", ruletab::write_tree_rule_table(table));
      translator->set_tree_rules(ruletab::read_tree_rule_table(man.read("tree-rules"), "tree-rules"));
      break;
    }
  }

  // tuning
  FeatureWeights initial = FeatureWeights::defaults();
  man.write("weights.init", "weights-v1", initial.write());
  FeatureWeights weights = initial;
  if (c.tune_enabled) {
    std::vector<deptree::DepSentence> dev_trees;
    std::vector<Tokens> dev_src = tree_kind ? tree_forms(dev_trees = load_trees(c.dev_trees))
                                            : load_sentences(c.dev_source, c.tokenize, c.source_lang);
    std::vector<Tokens> dev_ref = load_sentences(c.dev_target, c.tokenize, c.target_lang);
    if (dev_src.size() != dev_ref.size()) throw DataError("dev source and reference line counts differ");
    log << "[pipeline] tuning on " << dev_src.size() << " sentences (" << c.tune_iterations << " MERT iterations)\n";
    tune::MertConfig mc;
    mc.nbest = c.tune_nbest;
    mc.max_iterations = c.tune_iterations;
    mc.random_restarts = c.tune_random_restarts;
    mc.seed = opt.seed;
    auto res = tune::mert(
        dev_ref,
        [&](const FeatureWeights& w, int nbest) {
          return translator->translate_all(dev_src, tree_kind ? &dev_trees : nullptr, w, nbest, opt.jobs);
        },
        initial, mc);
    for (const auto& h : res.history()) log << "[pipeline] " << h << "\n";
    man.write("weights.tuned", "weights-v1", res.weights.write(res.history()));
    weights = FeatureWeights::read(man.read("weights.tuned"), "weights.tuned");
  }

  // test
  std::vector<deptree::DepSentence> test_trees;
  std::vector<Tokens> test_src = tree_kind ? tree_forms(test_trees = load_trees(c.test_trees))
                                           : load_sentences(c.test_source, c.tokenize, c.source_lang);
  std::vector<Tokens> test_ref = load_sentences(c.test_target, c.tokenize, c.target_lang);
  if (test_src.size() != test_ref.size()) throw DataError("test source and reference line counts differ");
  log << "[pipeline] decoding " << test_src.size() << " test sentences\n";
  const auto* tt = tree_kind ? &test_trees : nullptr;
  auto out = translator->translate_all(test_src, tt, weights, std::max(c.nbest, 1), opt.jobs);
  std::string nbest_text;
  for (std::size_t i = 0; i < out.size(); ++i)
    for (const auto& t : out[i]) nbest_text += decoder::format_nbest(i, t) + "\n";
  auto hyps = best_of(out);
  man.write("test.hyp", "tokenized-text", corpus::write_corpus(hyps));
  man.write("test.nbest", "nbest-v1", nbest_text);
  {
    std::string detok;
    for (const auto& h : hyps) detok += corpus::detokenize(h, c.target_lang) + "\n";
    man.write("test.detok", "text", detok);
  }
  man.write("report.txt", "report-v1", report_text(eval::score_system(hyps, test_ref), c.metrics));
  if (c.tune_enabled) {
    auto base = best_of(translator->translate_all(test_src, tt, initial, 1, opt.jobs));
    auto cmp = eval::compare_systems(base, hyps, test_ref);
    man.write("compare.txt", "compare-report-v1", eval::format_report_text(cmp));
    man.write("compare.tsv", "compare-report-tsv-v1", eval::format_report_tsv(cmp));
  }

  std::string manifest = "manifest-version\t1\nconfig_hash\t" + config_hash(c) + "\n";
  for (const auto& l : man.lines) manifest += l + "\n";
  write_file((fs::path(c.model_dir) / "manifest").string(), manifest);
  log << "[pipeline] done; artifacts in " << c.model_dir << "\n";
}

}  // namespace desksmt::pipeline

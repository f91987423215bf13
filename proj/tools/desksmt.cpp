// desksmt command-line front end. Exit status: 0 ok, 1 usage, 2 data, 3 internal.

#include <filesystem>
#include <iostream>
#include <iterator>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "desksmt/align.hpp"
#include "desksmt/corpus.hpp"
#include "desksmt/decoder.hpp"
#include "desksmt/deptree.hpp"
#include "desksmt/error.hpp"
#include "desksmt/eval.hpp"
#include "desksmt/lm.hpp"
#include "desksmt/phrasetab.hpp"
#include "desksmt/pipeline.hpp"
#include "desksmt/ruletab.hpp"
#include "desksmt/tune.hpp"

using namespace desksmt;
namespace fs = std::filesystem;

namespace {

std::string read_input(const std::string& path) {
  if (path.empty() || path == "-")
    return std::string(std::istreambuf_iterator<char>(std::cin), std::istreambuf_iterator<char>());
  return read_file(path);
}

void emit(const std::string& path, const std::string& content) {
  if (path.empty() || path == "-") {
    std::cout << content;
    std::cout.flush();
  } else {
    write_file(path, content);
  }
}

std::vector<Tokens> lines_of(const std::string& text) {
  std::vector<Tokens> out;
  auto lines = split_on(text, "\n");
  if (!lines.empty() && lines.back().empty()) lines.pop_back();
  for (const auto& l : lines) out.push_back(split_ws(l));
  return out;
}

std::vector<corpus::SentencePair> pairs_of(const std::string& src, const std::string& tgt) {
  return corpus::read_parallel(src, tgt);
}

struct ModelArgs {
  std::string kind = "phrase";
  std::string lm;
  std::string phrase_table, reordering, orientation = "msd";
  bool unidirectional = false;
  std::string rules, tree_rules;
  std::string weights;
  int stack_size = 100, distortion_limit = 6, table_limit = 20, max_phrase_len = 7;
  int cell_beam = 100, max_span = 10, k_best = 50;

  void add(CLI::App* app) {
    app->add_option("--kind", kind, "phrase, hier or tree")->capture_default_str();
    app->add_option("--lm", lm, "ARPA language model")->required();
    app->add_option("--phrase-table", phrase_table, "phrase table (phrase decoder)");
    app->add_option("--reordering", reordering, "lexicalized reordering table (phrase decoder)");
    app->add_option("--orientation", orientation, "msd or mslr")->capture_default_str();
    app->add_flag("--unidirectional", unidirectional, "reordering table has forward scores only");
    app->add_option("--rules", rules, "hierarchical rule table");
    app->add_option("--tree-rules", tree_rules, "tree-to-string rule table");
    app->add_option("--weights", weights, "weights file (defaults when omitted)");
    app->add_option("--stack-size", stack_size)->capture_default_str();
    app->add_option("--distortion-limit", distortion_limit, "negative: unlimited")->capture_default_str();
    app->add_option("--table-limit", table_limit)->capture_default_str();
    app->add_option("--max-phrase-len", max_phrase_len)->capture_default_str();
    app->add_option("--cell-beam", cell_beam)->capture_default_str();
    app->add_option("--max-span", max_span)->capture_default_str();
    app->add_option("--k-best-per-node", k_best)->capture_default_str();
  }

  std::unique_ptr<pipeline::Translator> load() const {
    pipeline::DecodeSettings s;
    s.kind = pipeline::parse_decoder_kind(kind);
    s.stack_size = stack_size;
    s.distortion_limit = distortion_limit;
    s.table_limit = table_limit;
    s.max_phrase_len = max_phrase_len;
    s.cell_beam = cell_beam;
    s.max_span = max_span;
    s.k_best_per_node = k_best;
    auto t = std::make_unique<pipeline::Translator>(s, lm::read_arpa(read_file(lm)));
    switch (s.kind) {
      case pipeline::DecoderKind::kPhrase: {
        if (phrase_table.empty()) throw UsageError("--phrase-table is required for --kind phrase");
        std::optional<phrasetab::ReorderingTable> reo;
        if (!reordering.empty())
          reo = phrasetab::read_reordering_table(read_file(reordering), phrasetab::parse_orientation_set(orientation),
                                                 !unidirectional);
        t->set_phrase_table(phrasetab::read_phrase_table(read_file(phrase_table), phrase_table), std::move(reo));
        break;
      }
      case pipeline::DecoderKind::kHier:
        if (rules.empty()) throw UsageError("--rules is required for --kind hier");
        t->set_rule_table(ruletab::read_rule_table(read_file(rules), rules));
        break;
      case pipeline::DecoderKind::kTree:
        if (tree_rules.empty()) throw UsageError("--tree-rules is required for --kind tree");
        t->set_tree_rules(ruletab::read_tree_rule_table(read_file(tree_rules), tree_rules));
        break;
    }
    return t;
  }

  decoder::FeatureWeights load_weights() const {
    if (weights.empty()) return decoder::FeatureWeights::defaults();
    return decoder::FeatureWeights::read(read_file(weights), weights);
  }
};

int run(int argc, char** argv) {
  CLI::App app{"desksmt: a desk-scale statistical machine translation toolkit"};
  app.require_subcommand(1);
  int jobs = 1;
  std::uint64_t seed = 1;
  app.add_option("--jobs", jobs, "worker threads")->capture_default_str();
  app.add_option("--seed", seed, "seed for every stochastic choice")->capture_default_str();

  // tokenize
  auto* tok = app.add_subcommand("tokenize", "tokenize raw text, one sentence per line");
  std::string tok_lang = "en", tok_in, tok_out;
  tok->add_option("--lang", tok_lang, "en or hi (Devanagari)")->capture_default_str();
  tok->add_option("-i,--input", tok_in, "input file (stdin when omitted)");
  tok->add_option("-o,--output", tok_out, "output file (stdout when omitted)");

  // clean
  auto* cl = app.add_subcommand("clean", "drop empty or over-long sentence pairs");
  std::string cl_src, cl_tgt, cl_osrc, cl_otgt;
  std::size_t cl_max = 80;
  cl->add_option("--source", cl_src)->required();
  cl->add_option("--target", cl_tgt)->required();
  cl->add_option("--out-source", cl_osrc)->required();
  cl->add_option("--out-target", cl_otgt)->required();
  cl->add_option("--max-len", cl_max)->capture_default_str();

  // train-lm
  auto* tlm = app.add_subcommand("train-lm", "train an interpolated Kneser-Ney LM");
  std::string lm_corpus, lm_out, lm_mode = "counts_of_counts";
  int lm_order = 3;
  double lm_fixed = 0.75;
  tlm->add_option("--corpus", lm_corpus, "tokenized text")->required();
  tlm->add_option("--order", lm_order)->capture_default_str();
  tlm->add_option("--discount", lm_mode, "counts_of_counts or fixed")->capture_default_str();
  tlm->add_option("--fixed-discount", lm_fixed)->capture_default_str();
  tlm->add_option("-o,--output", lm_out, "ARPA file");

  // train-align
  auto* tal = app.add_subcommand("train-align", "IBM Model 1/2 alignment with symmetrization");
  std::string al_src, al_tgt, al_out, al_fwd, al_bwd, al_heur = "grow-diag-final-and";
  int al_model = 2, al_iter = 5;
  tal->add_option("--source", al_src)->required();
  tal->add_option("--target", al_tgt)->required();
  tal->add_option("--model", al_model, "1 or 2")->capture_default_str();
  tal->add_option("--iterations", al_iter)->capture_default_str();
  tal->add_option("--heuristic", al_heur, "intersection, union or grow-diag-final-and")->capture_default_str();
  tal->add_option("-o,--output", al_out, "Pharaoh alignment file");
  tal->add_option("--lex-forward", al_fwd, "write t(target|source)");
  tal->add_option("--lex-backward", al_bwd, "write t(source|target)");

  // extract-phrases
  auto* xp = app.add_subcommand("extract-phrases", "extract and score a phrase table");
  std::string xp_src, xp_tgt, xp_al, xp_fwd, xp_bwd, xp_out;
  int xp_max = 7;
  xp->add_option("--source", xp_src)->required();
  xp->add_option("--target", xp_tgt)->required();
  xp->add_option("--alignments", xp_al)->required();
  xp->add_option("--lex-forward", xp_fwd)->required();
  xp->add_option("--lex-backward", xp_bwd)->required();
  xp->add_option("--max-len", xp_max)->capture_default_str();
  xp->add_option("-o,--output", xp_out);

  // train-reorder
  auto* tr = app.add_subcommand("train-reorder", "estimate a lexicalized reordering table");
  std::string tr_src, tr_tgt, tr_al, tr_out, tr_set = "msd";
  bool tr_uni = false;
  int tr_max = 7;
  double tr_sigma = 0.5;
  tr->add_option("--source", tr_src)->required();
  tr->add_option("--target", tr_tgt)->required();
  tr->add_option("--alignments", tr_al)->required();
  tr->add_option("--orientation", tr_set, "msd or mslr")->capture_default_str();
  tr->add_flag("--unidirectional", tr_uni, "forward scores only");
  tr->add_option("--max-len", tr_max)->capture_default_str();
  tr->add_option("--smoothing", tr_sigma)->capture_default_str();
  tr->add_option("-o,--output", tr_out);

  // extract-rules
  auto* xr = app.add_subcommand("extract-rules", "extract hierarchical or tree-to-string rules");
  std::string xr_kind = "hier", xr_src, xr_tgt, xr_trees, xr_al, xr_fwd, xr_bwd, xr_out;
  int xr_span = 10;
  xr->add_option("--kind", xr_kind, "hier or tree")->capture_default_str();
  xr->add_option("--source", xr_src, "source text (hier)");
  xr->add_option("--trees", xr_trees, "source CoNLL-U (tree)");
  xr->add_option("--target", xr_tgt)->required();
  xr->add_option("--alignments", xr_al)->required();
  xr->add_option("--lex-forward", xr_fwd, "hier only");
  xr->add_option("--lex-backward", xr_bwd, "hier only");
  xr->add_option("--max-span", xr_span)->capture_default_str();
  xr->add_option("-o,--output", xr_out);

  // decode / translate
  ModelArgs dm;
  auto* dec = app.add_subcommand("decode", "decode tokenized input");
  std::string dec_in, dec_out, dec_trees, dec_nbest_out;
  int dec_nbest = 1;
  dm.add(dec);
  dec->add_option("-i,--input", dec_in, "tokenized input (stdin when omitted)");
  dec->add_option("--trees", dec_trees, "CoNLL-U input for --kind tree");
  dec->add_option("--nbest", dec_nbest)->capture_default_str();
  dec->add_option("--nbest-output", dec_nbest_out, "write the n-best list here");
  dec->add_option("-o,--output", dec_out);

  ModelArgs tm;
  auto* trn = app.add_subcommand("translate", "translate raw text and print detokenized output");
  std::string trn_in, trn_out, trn_src_lang = "en", trn_tgt_lang = "hi";
  tm.add(trn);
  trn->add_option("-i,--input", trn_in, "raw text (stdin when omitted)");
  trn->add_option("--source-lang", trn_src_lang)->capture_default_str();
  trn->add_option("--target-lang", trn_tgt_lang)->capture_default_str();
  trn->add_option("-o,--output", trn_out);

  // tune
  ModelArgs um;
  auto* tun = app.add_subcommand("tune", "minimum error rate training on a dev set");
  std::string tun_src, tun_ref, tun_trees, tun_out;
  tune::MertConfig mc;
  um.add(tun);
  tun->add_option("--dev-source", tun_src, "tokenized dev source");
  tun->add_option("--dev-trees", tun_trees, "CoNLL-U dev source for --kind tree");
  tun->add_option("--dev-ref", tun_ref)->required();
  tun->add_option("--iterations", mc.max_iterations)->capture_default_str();
  tun->add_option("--nbest", mc.nbest)->capture_default_str();
  tun->add_option("--random-restarts", mc.random_restarts)->capture_default_str();
  tun->add_option("--min-weight-delta", mc.min_weight_delta)->capture_default_str();
  tun->add_option("-o,--output", tun_out, "tuned weights file");

  // evaluate
  auto* ev = app.add_subcommand("evaluate", "score a system against references");
  std::string ev_hyp, ev_ref, ev_out, ev_metrics = "bleu,wer,prf,meteor";
  ev->add_option("--hyp", ev_hyp)->required();
  ev->add_option("--ref", ev_ref)->required();
  ev->add_option("--metrics", ev_metrics)->capture_default_str();
  ev->add_option("-o,--output", ev_out);

  // compare
  auto* cmp = app.add_subcommand("compare", "compare two systems sentence by sentence");
  std::string cmp_a, cmp_b, cmp_ref, cmp_out;
  int cmp_top = 10;
  bool cmp_tsv = false;
  cmp->add_option("--a", cmp_a, "system A output")->required();
  cmp->add_option("--b", cmp_b, "system B output")->required();
  cmp->add_option("--ref", cmp_ref)->required();
  cmp->add_option("--top-k", cmp_top, "rows per n-gram table (0: all)")->capture_default_str();
  cmp->add_flag("--tsv", cmp_tsv, "tab-separated output");
  cmp->add_option("-o,--output", cmp_out);

  // human
  auto* hum = app.add_subcommand("human", "aggregate human fluency/adequacy scores");
  std::string hum_in, hum_out;
  hum->add_option("-i,--input", hum_in)->required();
  hum->add_option("-o,--output", hum_out);

  // pipeline
  auto* pl = app.add_subcommand("pipeline", "train, tune, test and evaluate from a config file");
  std::string pl_cfg, pl_dir;
  pl->add_option("--config", pl_cfg)->required();
  pl->add_option("--model-dir", pl_dir, "overrides paths.model_dir");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return 1;
  }
  if (jobs < 1) throw UsageError("--jobs must be at least 1");

  if (tok->parsed()) {
    std::string out;
    for (const auto& s : corpus::tokenize(read_input(tok_in), corpus::parse_profile(tok_lang)))
      out += join(s) + "\n";
    emit(tok_out, out);
  } else if (cl->parsed()) {
    auto kept = corpus::clean(pairs_of(cl_src, cl_tgt), cl_max);
    std::vector<Tokens> s, t;
    for (const auto& p : kept) {
      s.push_back(p.source);
      t.push_back(p.target);
    }
    write_file(cl_osrc, corpus::write_corpus(s));
    write_file(cl_otgt, corpus::write_corpus(t));
  } else if (tlm->parsed()) {
    auto m = lm::train_lm(corpus::read_corpus(lm_corpus), lm_order, pipeline::parse_discount_mode(lm_mode, lm_fixed),
                          jobs);
    emit(lm_out, lm::write_arpa(m));
  } else if (tal->parsed()) {
    if (al_model != 1 && al_model != 2) throw UsageError("--model must be 1 or 2");
    align::AlignerOptions ao;
    ao.ibm1_iterations = al_iter;
    ao.ibm2_iterations = al_model == 2 ? al_iter : 0;
    ao.heuristic = align::parse_heuristic(al_heur);
    ao.jobs = jobs;
    auto wa = align::align_corpus(pairs_of(al_src, al_tgt), ao);
    emit(al_out, align::write_alignments(wa.links));
    if (!al_fwd.empty()) write_file(al_fwd, align::write_ttable(wa.forward));
    if (!al_bwd.empty()) write_file(al_bwd, align::write_ttable(wa.backward));
  } else if (xp->parsed()) {
    phrasetab::ExtractOptions eo;
    eo.max_phrase_len = xp_max;
    eo.jobs = jobs;
    auto t = phrasetab::build_phrase_table(pairs_of(xp_src, xp_tgt), align::read_alignments(xp_al),
                                           align::read_ttable(read_file(xp_fwd), xp_fwd),
                                           align::read_ttable(read_file(xp_bwd), xp_bwd), eo);
    emit(xp_out, phrasetab::write_phrase_table(t));
  } else if (tr->parsed()) {
    phrasetab::ReorderingOptions ro;
    ro.set = phrasetab::parse_orientation_set(tr_set);
    ro.bidirectional = !tr_uni;
    ro.max_phrase_len = tr_max;
    ro.sigma = tr_sigma;
    emit(tr_out, phrasetab::write_reordering_table(
                     phrasetab::extract_reordering(pairs_of(tr_src, tr_tgt), align::read_alignments(tr_al), ro)));
  } else if (xr->parsed()) {
    if (xr_kind == "hier") {
      if (xr_src.empty() || xr_fwd.empty() || xr_bwd.empty())
        throw UsageError("--kind hier needs --source, --lex-forward and --lex-backward");
      ruletab::HierConfig hc;
      hc.max_span = xr_span;
      hc.jobs = jobs;
      emit(xr_out, ruletab::write_rule_table(ruletab::build_rule_table(
                       pairs_of(xr_src, xr_tgt), align::read_alignments(xr_al),
                       align::read_ttable(read_file(xr_fwd), xr_fwd), align::read_ttable(read_file(xr_bwd), xr_bwd),
                       hc)));
    } else if (xr_kind == "tree") {
      if (xr_trees.empty()) throw UsageError("--kind tree needs --trees");
      auto trees = deptree::parse_conllu(read_file(xr_trees), xr_trees);
      auto table = ruletab::build_tree_rule_table(trees, corpus::read_corpus(xr_tgt), align::read_alignments(xr_al));
      for (const auto& w : table.warnings) std::cerr << "warning: " << w << "\n";
      emit(xr_out, ruletab::write_tree_rule_table(table));
    } else {
      throw UsageError("--kind must be hier or tree");
    }
  } else if (dec->parsed()) {
    std::vector<Tokens> sents;
    std::vector<deptree::DepSentence> trees;
    if (!dec_trees.empty()) {
      trees = deptree::parse_conllu(read_file(dec_trees), dec_trees);
      for (const auto& t : trees) sents.push_back(t.forms());
    } else {
      sents = lines_of(read_input(dec_in));
    }
    if (sents.empty()) {
      emit(dec_out, "");
      return 0;
    }
    auto t = dm.load();
    auto out = t->translate_all(sents, dec_trees.empty() ? nullptr : &trees, dm.load_weights(),
                                std::max(dec_nbest, 1), jobs);
    std::string best, nb;
    for (std::size_t i = 0; i < out.size(); ++i) {
      best += (out[i].empty() ? std::string() : join(out[i].front().target)) + "\n";
      for (const auto& h : out[i]) nb += decoder::format_nbest(i, h) + "\n";
    }
    emit(dec_out, best);
    if (!dec_nbest_out.empty()) write_file(dec_nbest_out, nb);
  } else if (trn->parsed()) {
    auto sp = corpus::parse_profile(trn_src_lang);
    auto tp = corpus::parse_profile(trn_tgt_lang);
    auto sents = corpus::tokenize(read_input(trn_in), sp);
    if (sents.empty()) {
      emit(trn_out, "");
      return 0;
    }
    auto t = tm.load();
    if (t->kind() == pipeline::DecoderKind::kTree) throw UsageError("translate takes raw text; use decode --trees");
    auto out = t->translate_all(sents, nullptr, tm.load_weights(), 1, jobs);
    std::string text;
    for (const auto& l : out) text += corpus::detokenize(l.empty() ? Tokens{} : l.front().target, tp) + "\n";
    emit(trn_out, text);
  } else if (tun->parsed()) {
    std::vector<Tokens> src;
    std::vector<deptree::DepSentence> trees;
    if (!tun_trees.empty()) {
      trees = deptree::parse_conllu(read_file(tun_trees), tun_trees);
      for (const auto& t : trees) src.push_back(t.forms());
    } else {
      if (tun_src.empty()) throw UsageError("tune needs --dev-source or --dev-trees");
      src = corpus::read_corpus(tun_src);
    }
    auto refs = corpus::read_corpus(tun_ref);
    if (src.size() != refs.size()) throw DataError("dev source and reference line counts differ");
    auto t = um.load();
    mc.seed = seed;
    auto res = tune::mert(
        refs,
        [&](const decoder::FeatureWeights& w, int nbest) {
          return t->translate_all(src, tun_trees.empty() ? nullptr : &trees, w, nbest, jobs);
        },
        um.load_weights(), mc);
    for (const auto& h : res.history()) std::cerr << h << "\n";
    emit(tun_out, res.weights.write(res.history()));
  } else if (ev->parsed()) {
    auto hyps = corpus::read_corpus(ev_hyp);
    auto refs = corpus::read_corpus(ev_ref);
    auto s = eval::score_system(hyps, refs);
    std::string out = "sentences\t" + std::to_string(s.sentences) + "\n";
    for (const auto& m : split_on(ev_metrics, ",")) {
      auto name = trim(m);
      if (name == "bleu") {
        out += "bleu\t" + format_g(s.bleu.score, 6) + "\n";
        for (std::size_t n = 0; n < s.bleu.precisions.size(); ++n)
          out += "bleu_p" + std::to_string(n + 1) + "\t" + format_g(s.bleu.precisions[n], 6) + "\n";
        out += "bleu_bp\t" + format_g(s.bleu.brevity_penalty, 6) + "\n";
      } else if (name == "wer") {
        out += "wer\t" + format_g(s.wer, 6) + "\n";
      } else if (name == "prf") {
        out += "precision\t" + format_g(s.precision, 6) + "\nrecall\t" + format_g(s.recall, 6) + "\nf\t" +
               format_g(s.f, 6) + "\n";
      } else if (name == "meteor") {
        out += "meteor\t" + format_g(s.meteor, 6) + "\n";
      } else {
        throw UsageError("unknown metric '" + std::string(name) + "' (bleu, wer, prf, meteor)");
      }
    }
    emit(ev_out, out);
  } else if (cmp->parsed()) {
    auto r = eval::compare_systems(corpus::read_corpus(cmp_a), corpus::read_corpus(cmp_b),
                                   corpus::read_corpus(cmp_ref), cmp_top);
    emit(cmp_out, cmp_tsv ? eval::format_report_tsv(r) : eval::format_report_text(r));
  } else if (hum->parsed()) {
    auto tables = eval::read_human_scores(read_file(hum_in), hum_in);
    std::string out;
    for (std::size_t e = 0; e < tables.size(); ++e) {
      out += "# evaluator " + std::to_string(e + 1) + "\n";
      out += eval::format_human_summary(eval::aggregate_human(tables[e]));
    }
    emit(hum_out, out);
  } else if (pl->parsed()) {
    const std::string base = fs::absolute(fs::path(pl_cfg)).parent_path().string();
    auto cfg = pipeline::parse_config(read_file(pl_cfg), pl_cfg, base);
    if (!pl_dir.empty()) cfg.model_dir = fs::absolute(pl_dir).lexically_normal().string();
    pipeline::RunOptions ro;
    ro.jobs = jobs;
    ro.seed = seed;
    pipeline::run_pipeline(cfg, ro, std::cerr);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 1;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  } catch (const InvariantError& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 3;
  }
}

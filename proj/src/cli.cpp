#include "gbts/cli.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "gbts/classify.hpp"
#include "gbts/parser.hpp"
#include "gbts/query.hpp"
#include "gbts/rewrite.hpp"
#include "gbts/serialize.hpp"

namespace gbts {

namespace {

int log_level() {
    const char* env = std::getenv("GBTS_LOG");
    if (!env) return 1;  // info
    std::string v(env);
    if (v == "error") return 0;
    if (v == "info") return 1;
    if (v == "debug") return 2;
    if (v == "trace") return 3;
    return 1;
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw GbtsError("cannot write file: " + path);
    out << content;
}

struct Budgets {
    size_t cap_atoms = 1'000'000;
    size_t cap_bags = 100'000;
    size_t cap_patterns = 100'000;

    void add_flags(CLI::App* cmd) {
        cmd->add_option("--cap-atoms", cap_atoms, "Chase atom budget");
        cmd->add_option("--cap-bags", cap_bags, "Blocked tree bag budget");
        cmd->add_option("--cap-patterns", cap_patterns, "Saturation pattern budget");
    }
    EntailOptions entail_options() const {
        EntailOptions opts;
        opts.chase.max_atoms = cap_atoms;
        opts.tree.max_bags = cap_bags;
        opts.saturate.max_patterns = cap_patterns;
        return opts;
    }
};

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"entailment engine for existential rule knowledge bases"};
    app.require_subcommand(1);

    std::string file;
    Budgets budgets;

    auto* classify_cmd = app.add_subcommand("classify", "Report the fragment of the rule set");
    bool kv = false;
    classify_cmd->add_option("file", file, "KB file")->required();
    classify_cmd->add_flag("--kv", kv, "Machine-readable key/value output");

    auto* chase_cmd = app.add_subcommand("chase", "Breadth-first saturation up to a depth");
    size_t depth = 0;
    bool greedy_check = false;
    chase_cmd->add_option("file", file, "KB file")->required();
    chase_cmd->add_option("--depth", depth, "Breadth-first steps")->required();
    chase_cmd->add_flag("--greedy-check", greedy_check,
                        "Report the greedy witness of every application");
    budgets.add_flags(chase_cmd);

    auto* saturate_cmd = app.add_subcommand("saturate", "Pattern saturation and blocked tree");
    std::string rules_out, tree_out, dot_out;
    saturate_cmd->add_option("file", file, "KB file")->required();
    saturate_cmd->add_option("--rules-out", rules_out, "Write the rule base as JSON");
    saturate_cmd->add_option("--tree-out", tree_out, "Write the blocked tree as JSON");
    saturate_cmd->add_option("--dot", dot_out, "Write the blocked tree as a digraph");
    budgets.add_flags(saturate_cmd);

    auto* answer_cmd = app.add_subcommand("answer", "Decide the queries of the KB file");
    std::string mode = "rule";
    std::string witness_out;
    answer_cmd->add_option("file", file, "KB file")->required();
    answer_cmd->add_option("--mode", mode, "apt or rule")->check(CLI::IsMember({"apt", "rule"}));
    answer_cmd->add_option("--witness", witness_out, "Write the proof of the first query");
    budgets.add_flags(answer_cmd);

    auto* translate_cmd = app.add_subcommand("translate", "Rewrite the rule set");
    std::string target;
    std::string translate_out;
    translate_cmd->add_option("file", file, "KB file")->required();
    translate_cmd->add_option("--target", target, "wfg or guarded")
        ->required()
        ->check(CLI::IsMember({"wfg", "guarded"}));
    translate_cmd->add_option("--out", translate_out, "Output file (default stdout)");

    auto* oracle_cmd = app.add_subcommand("oracle", "Chase-based query check up to a depth");
    oracle_cmd->add_option("file", file, "KB file")->required();
    oracle_cmd->add_option("--depth", depth, "Breadth-first steps")->required();
    budgets.add_flags(oracle_cmd);

    std::vector<std::string> argv = args;
    std::reverse(argv.begin(), argv.end());
    try {
        app.parse(argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            out << app.help();
            return 0;
        }
        err << "error: " << e.what() << "\n";
        return 2;
    }

    try {
        reset_fresh_names();  // byte-identical output across invocations
        KBDocument doc = parse_file(file);
        KnowledgeBase kb = doc.kb();

        if (classify_cmd->parsed()) {
            FragmentReport report = classify(kb.rules());
            if (kv) {
                out << report.key_value(kb.rules());
            } else {
                out << "labels: " << report.summary() << "\n";
                out << "wfg: " << (report.wfg ? "yes" : "no") << "\n";
                out << "affected positions:";
                for (const auto& p : report.affected)
                    out << " " << predicate_name(p.pred) << ":" << p.index;
                out << "\n";
            }
            return 0;
        }

        if (chase_cmd->parsed()) {
            ChaseLimits limits{budgets.cap_atoms};
            if (greedy_check) {
                Derivation d = derive_breadth_first(kb, SIZE_MAX, limits, depth);
                auto witnesses = greedy_witnesses(kb, d);
                for (size_t i = 0; i < witnesses.size(); ++i) {
                    out << "step " << i << " rule " << kb.rule(d.steps[i].rule).name() << ": ";
                    if (!witnesses[i])
                        out << "no greedy witness\n";
                    else if (*witnesses[i] == 0)
                        out << "root\n";
                    else
                        out << "bag " << *witnesses[i] << "\n";
                }
                return 0;
            }
            AtomSet result = k_saturation(kb, depth, limits);
            for (const Atom& a : result.atoms()) out << to_string(a) << ".\n";
            if (log_level() >= 1) err << "atoms: " << result.size() << "\n";
            return 0;
        }

        if (saturate_cmd->parsed()) {
            SaturateOptions sopts;
            sopts.max_patterns = budgets.cap_patterns;
            Saturation sat = saturate(kb, sopts);
            BlockedTree tree = build_full_blocked_tree(sat, {budgets.cap_bags});
            out << "patterns: " << sat.patterns().size() << "\n";
            out << "rules: " << sat.rules().size() << "\n";
            out << "most informative: " << sat.most_informative().size() << "\n";
            out << "bags: " << tree.bags().size() << "\n";
            if (!rules_out.empty()) write_file(rules_out, rule_base_json(sat));
            if (!tree_out.empty()) write_file(tree_out, blocked_tree_json(tree));
            if (!dot_out.empty()) write_file(dot_out, blocked_tree_dot(tree));
            return 0;
        }

        if (answer_cmd->parsed()) {
            if (doc.queries.empty()) {
                err << "error: no @queries section\n";
                return 2;
            }
            EntailOptions opts = budgets.entail_options();
            opts.mode = mode == "apt" ? QueryMode::Apt : QueryMode::QueryAsRule;
            bool all = true;
            for (size_t i = 0; i < doc.queries.size(); ++i) {
                EntailResult res = entails(kb, doc.queries[i], opts);
                out << "query " << i << ": " << (res.entailed ? "entailed" : "not entailed")
                    << "\n";
                all = all && res.entailed;
                if (i == 0 && !witness_out.empty() && res.entailed && !res.witnesses.empty())
                    write_file(witness_out, witness_json(res.witnesses.front(), doc.queries[i]));
            }
            return all ? 0 : 1;
        }

        if (translate_cmd->parsed()) {
            KBDocument result;
            if (target == "wfg") {
                KnowledgeBase translated = wfg_translate(kb);
                result.facts = translated.fact();
                result.rules = translated.rules();
            } else {
                NormalizedRules normalized = normalize_fg(kb.rules());
                result.facts = kb.fact();
                for (const Rule& r : normalized.connected)
                    for (Rule& g : ba_to_guarded(r)) result.rules.push_back(std::move(g));
                for (const Rule& r : normalized.disconnected) result.rules.push_back(r);
            }
            result.queries = doc.queries;
            std::string text = print_document(result);
            if (translate_out.empty())
                out << text;
            else
                write_file(translate_out, text);
            return 0;
        }

        if (oracle_cmd->parsed()) {
            if (doc.queries.empty()) {
                err << "error: no @queries section\n";
                return 2;
            }
            ChaseLimits limits{budgets.cap_atoms};
            bool all = true;
            for (size_t i = 0; i < doc.queries.size(); ++i) {
                OracleAnswer a = oracle_entails(kb, doc.queries[i], depth, limits);
                out << "query " << i << ": " << to_string(a) << "\n";
                all = all && a == OracleAnswer::Yes;
            }
            return all ? 0 : 1;
        }
    } catch (const NotGreedy& e) {
        err << "error: NotGreedy: " << e.what() << "\n";
        return 2;
    } catch (const GbtsError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}

}  // namespace gbts

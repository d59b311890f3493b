#pragma once

#include <filesystem>
#include <map>
#include <mutex>
#include <string>
#include <vector>

#include "drift/error.hpp"
#include "drift/io.hpp"
#include "drift/manifest.hpp"
#include "drift/parallel.hpp"
#include "drift/path.hpp"
#include "drift/subprocess.hpp"

namespace drift {

inline const std::vector<std::string>& default_code_globs() {
    static const std::vector<std::string> globs = {
        "*.py", "*.ts", "*.tsx", "*.js",  "*.jsx", "*.go", "*.rs",   "*.java", "*.kt",   "*.c",   "*.cc",   "*.cpp", "*.h",
        "*.hpp", "*.php", "*.rb", "*.swift", "*.cs", "*.sql", "*.sh", "*.bash", "*.zsh", "*.html", "*.css", "*.scss"};
    return globs;
}

struct WindowRef {
    fs::path repo_root;
    std::string base_ref;
    std::string head_ref;
    std::vector<std::string> path_globs = default_code_globs();
};

struct CommandRecord {
    std::vector<std::string> argv;
    int exit_code;
};

// Thin wrapper over the git binary that keeps an audit trail of every invocation.
class GitRepo {
public:
    explicit GitRepo(fs::path root) : root_(std::move(root)) {
        if (!fs::is_directory(root_))
            throw Error("repository not found: " + root_.string());
        auto r = run({"rev-parse", "--show-toplevel"}, false);
        if (r.exit_code != 0)
            throw GitError("not a git repository: " + root_.string(), r.err, r.exit_code);
    }

    ProcessResult run(const std::vector<std::string>& args, bool check = true) const {
        std::vector<std::string> argv = {"git", "-C", root_.string(), "-c", "core.quotepath=false"};
        argv.insert(argv.end(), args.begin(), args.end());
        ProcessResult r = run_process(argv);
        {
            std::lock_guard lock(log_mutex_);
            log_.push_back({argv, r.exit_code});
        }
        if (check && r.exit_code != 0)
            throw GitError("git " + (args.empty() ? std::string() : args.front()) + " failed (exit " +
                               std::to_string(r.exit_code) + ")",
                           r.err, r.exit_code);
        return r;
    }

    std::string resolve_commit(const std::string& ref) const {
        auto r = run({"rev-parse", "--verify", "--quiet", ref + "^{commit}"}, false);
        if (r.exit_code != 0)
            throw GitError("cannot resolve revision '" + ref + "'", r.err, r.exit_code);
        auto sha = r.out;
        while (!sha.empty() && (sha.back() == '\n' || sha.back() == '\r'))
            sha.pop_back();
        return sha;
    }

    const fs::path& root() const noexcept { return root_; }

    std::vector<CommandRecord> commands() const {
        std::lock_guard lock(log_mutex_);
        return log_;
    }

private:
    fs::path root_;
    mutable std::mutex log_mutex_;
    mutable std::vector<CommandRecord> log_;
};

inline std::vector<std::string> diff_flags() {
    return {"diff", "-U5", "--diff-algorithm=histogram", "--minimal", "--ignore-space-at-eol", "-M"};
}

// Pathspec for one change: renames pass both sides so -M can pair them.
inline std::vector<std::string> diff_pathspec(const ChangeEntry& e) {
    if (e.status == ChangeStatus::Renamed)
        return {e.old_path->str(), e.path.str()};
    return {e.path.str()};
}

inline std::string extract_diff(const GitRepo& repo, const std::string& base, const std::string& head, const ChangeEntry& e) {
    auto args = diff_flags();
    args.push_back(base + ".." + head);
    args.push_back("--");
    for (auto& p : diff_pathspec(e))
        args.push_back(std::move(p));
    return repo.run(args).out;
}

// Verbatim git output for one window plus the derived per-file artifacts.
struct WindowCapture {
    std::string base_ref;
    std::string head_ref;
    std::string base_sha;
    std::string head_sha;
    std::string name_status;                 // ACMR pass, then the D pass when requested
    std::map<std::string, std::string> patches;  // Y-side path -> unified diff
    std::map<std::string, std::string> files;    // Y-side contents of A/M files
    std::string snapshot_listing;            // every path tracked at head
    std::vector<CommandRecord> commands;

    const std::string& patch_for(const NormalizedPath& p) const {
        auto it = patches.find(p.str());
        if (it == patches.end())
            throw Error("no captured diff for '" + p.str() + "' in this window");
        return it->second;
    }
};

struct CaptureOptions {
    bool include_deletes = false;
    std::size_t workers = 4;
};

inline WindowCapture capture_window(const WindowRef& w, const CaptureOptions& opts = {}) {
    if (w.path_globs.empty())
        throw Error("window: at least one path glob is required");
    GitRepo repo(w.repo_root);
    WindowCapture cap;
    cap.base_ref = w.base_ref;
    cap.head_ref = w.head_ref;
    cap.base_sha = repo.resolve_commit(w.base_ref);
    cap.head_sha = repo.resolve_commit(w.head_ref);

    auto name_status = [&](const char* filter) {
        std::vector<std::string> args = {"diff", "--name-status", "-M", std::string("--diff-filter=") + filter,
                                         cap.base_sha + ".." + cap.head_sha, "--"};
        args.insert(args.end(), w.path_globs.begin(), w.path_globs.end());
        return repo.run(args).out;
    };
    cap.name_status = name_status("ACMR");
    if (opts.include_deletes)
        cap.name_status += name_status("D");

    auto entries = parse_name_status(cap.name_status);
    auto diffs = parallel_map(entries, opts.workers,
                              [&](const ChangeEntry& e) { return extract_diff(repo, cap.base_sha, cap.head_sha, e); });
    for (std::size_t i = 0; i < entries.size(); ++i)
        cap.patches[entries[i].path.str()] = std::move(diffs[i]);

    std::vector<ChangeEntry> live;
    for (const auto& e : entries)
        if (e.status == ChangeStatus::Added || e.status == ChangeStatus::Modified)
            live.push_back(e);
    auto contents = parallel_map(live, opts.workers,
                                 [&](const ChangeEntry& e) { return repo.run({"show", cap.head_sha + ":" + e.path.str()}).out; });
    for (std::size_t i = 0; i < live.size(); ++i)
        cap.files[live[i].path.str()] = std::move(contents[i]);

    cap.snapshot_listing = repo.run({"ls-tree", "-r", "--name-only", cap.head_sha}).out;
    cap.commands = repo.commands();
    return cap;
}

inline ChangeManifest manifest_from_capture(const WindowCapture& cap) {
    return build_manifest(parse_name_status(cap.name_status), cap.base_sha, cap.head_sha);
}

// On-disk layout of a capture directory:
//   refs.json, name_status.txt, snapshot.txt, commands.json,
//   patches/<path>.patch, files/<path>
inline void save_capture(const WindowCapture& cap, const fs::path& dir) {
    ordered_json refs = {{"base_ref", cap.base_ref}, {"head_ref", cap.head_ref}, {"base", cap.base_sha}, {"head", cap.head_sha}};
    write_file_atomic(dir / "refs.json", to_pretty_json(refs));
    write_file_atomic(dir / "name_status.txt", cap.name_status);
    write_file_atomic(dir / "snapshot.txt", cap.snapshot_listing);
    ordered_json cmds = ordered_json::array();
    for (const auto& c : cap.commands)
        cmds.push_back({{"argv", c.argv}, {"exit_code", c.exit_code}});
    write_file_atomic(dir / "commands.json", to_pretty_json(cmds));
    for (const auto& [path, text] : cap.patches)
        write_file_atomic(dir / "patches" / (path + ".patch"), text);
    for (const auto& [path, text] : cap.files)
        write_file_atomic(dir / "files" / path, text);
}

inline WindowCapture load_capture(const fs::path& dir) {
    if (!fs::is_directory(dir))
        throw Error("capture directory not found: " + dir.string());
    WindowCapture cap;
    cap.name_status = read_text_file(dir / "name_status.txt");
    if (fs::exists(dir / "refs.json")) {
        auto refs = ordered_json::parse(read_text_file(dir / "refs.json"));
        cap.base_ref = refs.value("base_ref", "");
        cap.head_ref = refs.value("head_ref", "");
        cap.base_sha = refs.value("base", cap.base_ref);
        cap.head_sha = refs.value("head", cap.head_ref);
    }
    if (fs::exists(dir / "snapshot.txt"))
        cap.snapshot_listing = read_text_file(dir / "snapshot.txt");
    auto slurp_tree = [](const fs::path& root, std::string_view strip_suffix, std::map<std::string, std::string>& out) {
        if (!fs::is_directory(root))
            return;
        for (const auto& f : fs::recursive_directory_iterator(root)) {
            if (!f.is_regular_file())
                continue;
            std::string rel = fs::relative(f.path(), root).generic_string();
            if (!strip_suffix.empty()) {
                if (rel.size() <= strip_suffix.size() || rel.compare(rel.size() - strip_suffix.size(), strip_suffix.size(), strip_suffix) != 0)
                    continue;
                rel.resize(rel.size() - strip_suffix.size());
            }
            out[rel] = read_text_file(f.path());
        }
    };
    slurp_tree(dir / "patches", ".patch", cap.patches);
    slurp_tree(dir / "files", "", cap.files);
    return cap;
}

} // namespace drift

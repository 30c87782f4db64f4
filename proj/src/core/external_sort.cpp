// Copyright 2026 The PCT Authors
// SPDX-License-Identifier: Apache-2.0

#include "external_sort.hpp"

#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <queue>

#include "error.hpp"

namespace pct {

namespace {

std::string run_path(const std::string& dir, std::size_t index) {
  static std::atomic<std::uint64_t> counter{0};
  return dir + "/pct-run-" + std::to_string(::getpid()) + "-" + std::to_string(counter++) + "-" +
         std::to_string(index) + ".keys";
}

class RunReader {
 public:
  RunReader(const std::string& path, std::size_t key_length)
      : in_(path, std::ios::binary), key_(key_length, '\0') {
    if (!in_) fail(ErrorCode::kIo, "cannot reopen sort run " + path);
    advance();
  }
  bool done() const { return done_; }
  const std::string& key() const { return key_; }
  void advance() {
    if (!in_.read(key_.data(), static_cast<std::streamsize>(key_.size()))) done_ = true;
  }

 private:
  std::ifstream in_;
  std::string key_;
  bool done_ = false;
};

}  // namespace

ExternalKeySorter::ExternalKeySorter(std::size_t key_length, std::size_t run_keys, std::string tmp_dir)
    : key_length_(key_length), run_keys_(std::max<std::size_t>(run_keys, 1)), tmp_dir_(std::move(tmp_dir)) {
  if (tmp_dir_.empty()) tmp_dir_ = std::filesystem::temp_directory_path().string();
}

ExternalKeySorter::~ExternalKeySorter() {
  std::error_code ec;
  for (const auto& r : runs_) std::filesystem::remove(r, ec);
}

void ExternalKeySorter::add(std::string_view key) {
  if (key.size() != key_length_) fail(ErrorCode::kInvalidInput, "key length mismatch in sorter");
  buffer_.emplace_back(key);
  ++added_;
  if (buffer_.size() >= run_keys_) spill();
}

void ExternalKeySorter::spill() {
  std::sort(buffer_.begin(), buffer_.end());
  buffer_.erase(std::unique(buffer_.begin(), buffer_.end()), buffer_.end());
  const std::string path = run_path(tmp_dir_, runs_.size());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::kIo, "cannot create sort run " + path);
  runs_.push_back(path);
  for (const auto& k : buffer_) out.write(k.data(), static_cast<std::streamsize>(k.size()));
  if (!out) fail(ErrorCode::kIo, "write failed on sort run " + path);
  buffer_.clear();
}

void ExternalKeySorter::merge(const std::function<void(std::string_view)>& sink) {
  std::sort(buffer_.begin(), buffer_.end());
  buffer_.erase(std::unique(buffer_.begin(), buffer_.end()), buffer_.end());
  if (runs_.empty()) {
    for (const auto& k : buffer_) sink(k);
    buffer_.clear();
    return;
  }
  if (!buffer_.empty()) spill();

  std::vector<std::unique_ptr<RunReader>> readers;
  for (const auto& r : runs_) readers.push_back(std::make_unique<RunReader>(r, key_length_));
  auto greater = [&](std::size_t a, std::size_t b) { return readers[a]->key() > readers[b]->key(); };
  std::priority_queue<std::size_t, std::vector<std::size_t>, decltype(greater)> heap(greater);
  for (std::size_t i = 0; i < readers.size(); ++i)
    if (!readers[i]->done()) heap.push(i);
  std::string last;
  bool have_last = false;
  while (!heap.empty()) {
    const std::size_t i = heap.top();
    heap.pop();
    if (!have_last || readers[i]->key() != last) {
      last = readers[i]->key();
      have_last = true;
      sink(last);
    }
    readers[i]->advance();
    if (!readers[i]->done()) heap.push(i);
  }
  readers.clear();
  std::error_code ec;
  for (const auto& r : runs_) std::filesystem::remove(r, ec);
  runs_.clear();
}

}  // namespace pct

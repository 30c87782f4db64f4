// Copyright 2026 The PCT Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace pct {

// Sorts and deduplicates fixed-length keys that may not fit in memory. Keys are
// buffered up to `run_keys`, then sorted and spilled to a run file under
// `tmp_dir`; merge() streams the global sorted unique sequence.
class ExternalKeySorter {
 public:
  ExternalKeySorter(std::size_t key_length, std::size_t run_keys, std::string tmp_dir);
  ~ExternalKeySorter();
  ExternalKeySorter(const ExternalKeySorter&) = delete;
  ExternalKeySorter& operator=(const ExternalKeySorter&) = delete;

  void add(std::string_view key);

  // Calls sink once per distinct key in strictly increasing order. Consumes
  // the sorter.
  void merge(const std::function<void(std::string_view)>& sink);

  std::size_t run_count() const { return runs_.size(); }
  std::size_t added() const { return added_; }

 private:
  void spill();

  std::size_t key_length_;
  std::size_t run_keys_;
  std::string tmp_dir_;
  std::vector<std::string> buffer_;
  std::vector<std::string> runs_;
  std::size_t added_ = 0;
};

}  // namespace pct

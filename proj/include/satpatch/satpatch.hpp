/*
 * Copyright 2026 The satpatch Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *   http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#pragma once

#include "satpatch/chunker.hpp"
#include "satpatch/corpusgen.hpp"
#include "satpatch/diffgen.hpp"
#include "satpatch/editops.hpp"
#include "satpatch/fstree.hpp"
#include "satpatch/gzip.hpp"
#include "satpatch/layerstore.hpp"
#include "satpatch/linksim.hpp"
#include "satpatch/myers.hpp"
#include "satpatch/package.hpp"
#include "satpatch/reconstruct.hpp"
#include "satpatch/sha256.hpp"
#include "satpatch/tar.hpp"

/* @ts-self-types="./vcvrl_web.d.ts" */

/**
 * One anchor draw over a volume.
 */
export class AnchorView {
    static __wrap(ptr) {
        const obj = Object.create(AnchorView.prototype);
        obj.__wbg_ptr = ptr;
        AnchorViewFinalization.register(obj, obj.__wbg_ptr, obj);
        return obj;
    }
    __destroy_into_raw() {
        const ptr = this.__wbg_ptr;
        this.__wbg_ptr = 0;
        AnchorViewFinalization.unregister(this);
        return ptr;
    }
    free() {
        const ptr = this.__destroy_into_raw();
        wasm.__wbg_anchorview_free(ptr, 0);
    }
    /**
     * @returns {boolean}
     */
    fallback() {
        const ret = wasm.anchorview_fallback(this.__wbg_ptr);
        return ret !== 0;
    }
    /**
     * @returns {number}
     */
    from_hard() {
        const ret = wasm.anchorview_from_hard(this.__wbg_ptr);
        return ret >>> 0;
    }
    /**
     * @returns {number}
     */
    from_pool() {
        const ret = wasm.anchorview_from_pool(this.__wbg_ptr);
        return ret >>> 0;
    }
    /**
     * @returns {number}
     */
    hard_count() {
        const ret = wasm.anchorview_hard_count(this.__wbg_ptr);
        return ret >>> 0;
    }
    /**
     * @returns {number}
     */
    pool_size() {
        const ret = wasm.anchorview_pool_size(this.__wbg_ptr);
        return ret >>> 0;
    }
    /**
     * Anchors on slice `z` that fall in it.
     * @param {number} z
     * @returns {number}
     */
    slice_count(z) {
        const ret = wasm.anchorview_slice_count(this.__wbg_ptr, z);
        return ret >>> 0;
    }
    /**
     * @param {number} z
     * @returns {Uint8Array}
     */
    slice_rgba(z) {
        const ret = wasm.anchorview_slice_rgba(this.__wbg_ptr, z);
        if (ret[3]) {
            throw takeFromExternrefTable0(ret[2]);
        }
        var v1 = getArrayU8FromWasm0(ret[0], ret[1]).slice();
        wasm.__wbindgen_free(ret[0], ret[1] * 1, 1);
        return v1;
    }
}
if (Symbol.dispose) AnchorView.prototype[Symbol.dispose] = AnchorView.prototype.free;

/**
 * Small training run advanced one optimizer step at a time. Validation and
 * anchor views use the first validation volume.
 */
export class DemoTrainer {
    __destroy_into_raw() {
        const ptr = this.__wbg_ptr;
        this.__wbg_ptr = 0;
        DemoTrainerFinalization.unregister(this);
        return ptr;
    }
    free() {
        const ptr = this.__destroy_into_raw();
        wasm.__wbg_demotrainer_free(ptr, 0);
    }
    /**
     * @returns {number}
     */
    depth() {
        const ret = wasm.demotrainer_depth(this.__wbg_ptr);
        return ret >>> 0;
    }
    /**
     * @returns {boolean}
     */
    finished() {
        const ret = wasm.demotrainer_finished(this.__wbg_ptr);
        return ret !== 0;
    }
    /**
     * @returns {number}
     */
    height() {
        const ret = wasm.demotrainer_height(this.__wbg_ptr);
        return ret >>> 0;
    }
    /**
     * @returns {bigint}
     */
    iteration() {
        const ret = wasm.demotrainer_iteration(this.__wbg_ptr);
        return BigInt.asUintN(64, ret);
    }
    /**
     * `strategy` is `none` for the plain backbone, or `random`, `ph`,
     * `hybrid` for siamese training with that anchor strategy.
     * @param {bigint} seed
     * @param {string} strategy
     * @param {number} anchors
     * @param {number} iterations
     */
    constructor(seed, strategy, anchors, iterations) {
        const ptr0 = passStringToWasm0(strategy, wasm.__wbindgen_malloc, wasm.__wbindgen_realloc);
        const len0 = WASM_VECTOR_LEN;
        const ret = wasm.demotrainer_new(seed, ptr0, len0, anchors, iterations);
        if (ret[2]) {
            throw takeFromExternrefTable0(ret[1]);
        }
        this.__wbg_ptr = ret[0];
        DemoTrainerFinalization.register(this, this.__wbg_ptr, this);
        return this;
    }
    /**
     * @returns {number}
     */
    parameter_count() {
        const ret = wasm.demotrainer_parameter_count(this.__wbg_ptr);
        return ret >>> 0;
    }
    /**
     * Validation slice with true positives, false positives and false
     * negatives coloured.
     * @param {number} z
     * @returns {Uint8Array}
     */
    prediction_rgba(z) {
        const ret = wasm.demotrainer_prediction_rgba(this.__wbg_ptr, z);
        if (ret[3]) {
            throw takeFromExternrefTable0(ret[2]);
        }
        var v1 = getArrayU8FromWasm0(ret[0], ret[1]).slice();
        wasm.__wbindgen_free(ret[0], ret[1] * 1, 1);
        return v1;
    }
    /**
     * Draw `n` anchors from the neuron pool of the validation volume, where
     * hard members are neuron voxels the current network misses.
     * @param {string} strategy
     * @param {number} n
     * @param {bigint} seed
     * @returns {AnchorView}
     */
    sample_anchors(strategy, n, seed) {
        const ptr0 = passStringToWasm0(strategy, wasm.__wbindgen_malloc, wasm.__wbindgen_realloc);
        const len0 = WASM_VECTOR_LEN;
        const ret = wasm.demotrainer_sample_anchors(this.__wbg_ptr, ptr0, len0, n, seed);
        if (ret[2]) {
            throw takeFromExternrefTable0(ret[1]);
        }
        return AnchorView.__wrap(ret[0]);
    }
    /**
     * One optimizer step; returns the iteration record as JSON.
     * @returns {string}
     */
    step() {
        let deferred2_0;
        let deferred2_1;
        try {
            const ret = wasm.demotrainer_step(this.__wbg_ptr);
            var ptr1 = ret[0];
            var len1 = ret[1];
            if (ret[3]) {
                ptr1 = 0; len1 = 0;
                throw takeFromExternrefTable0(ret[2]);
            }
            deferred2_0 = ptr1;
            deferred2_1 = len1;
            return getStringFromWasm0(ptr1, len1);
        } finally {
            wasm.__wbindgen_free(deferred2_0, deferred2_1, 1);
        }
    }
    /**
     * @returns {bigint}
     */
    total_iterations() {
        const ret = wasm.demotrainer_total_iterations(this.__wbg_ptr);
        return BigInt.asUintN(64, ret);
    }
    /**
     * F1 of the current network on the validation volume.
     * @returns {number}
     */
    validation_f1() {
        const ret = wasm.demotrainer_validation_f1(this.__wbg_ptr);
        if (ret[2]) {
            throw takeFromExternrefTable0(ret[1]);
        }
        return ret[0];
    }
    /**
     * @returns {number}
     */
    width() {
        const ret = wasm.demotrainer_width(this.__wbg_ptr);
        return ret >>> 0;
    }
}
if (Symbol.dispose) DemoTrainer.prototype[Symbol.dispose] = DemoTrainer.prototype.free;

/**
 * A generated volume with its ground-truth label.
 */
export class Volume {
    static __wrap(ptr) {
        const obj = Object.create(Volume.prototype);
        obj.__wbg_ptr = ptr;
        VolumeFinalization.register(obj, obj.__wbg_ptr, obj);
        return obj;
    }
    __destroy_into_raw() {
        const ptr = this.__wbg_ptr;
        this.__wbg_ptr = 0;
        VolumeFinalization.unregister(this);
        return ptr;
    }
    free() {
        const ptr = this.__destroy_into_raw();
        wasm.__wbg_volume_free(ptr, 0);
    }
    /**
     * @returns {number}
     */
    depth() {
        const ret = wasm.volume_depth(this.__wbg_ptr);
        return ret >>> 0;
    }
    /**
     * @returns {number}
     */
    foreground_fraction() {
        const ret = wasm.volume_foreground_fraction(this.__wbg_ptr);
        return ret;
    }
    /**
     * @param {bigint} seed
     * @param {number} noise_sigma
     * @param {number} branches
     * @returns {Volume}
     */
    static generate(seed, noise_sigma, branches) {
        const ret = wasm.volume_generate(seed, noise_sigma, branches);
        if (ret[2]) {
            throw takeFromExternrefTable0(ret[1]);
        }
        return Volume.__wrap(ret[0]);
    }
    /**
     * @returns {number}
     */
    height() {
        const ret = wasm.volume_height(this.__wbg_ptr);
        return ret >>> 0;
    }
    /**
     * Intensities in gray, optionally with the label blended on top.
     * @param {number} z
     * @param {boolean} show_label
     * @returns {Uint8Array}
     */
    slice_rgba(z, show_label) {
        const ret = wasm.volume_slice_rgba(this.__wbg_ptr, z, show_label);
        if (ret[3]) {
            throw takeFromExternrefTable0(ret[2]);
        }
        var v1 = getArrayU8FromWasm0(ret[0], ret[1]).slice();
        wasm.__wbindgen_free(ret[0], ret[1] * 1, 1);
        return v1;
    }
    /**
     * @returns {number}
     */
    width() {
        const ret = wasm.volume_width(this.__wbg_ptr);
        return ret >>> 0;
    }
}
if (Symbol.dispose) Volume.prototype[Symbol.dispose] = Volume.prototype.free;

/**
 * Descriptor momentum coefficient at `points` evenly spaced iterations of a
 * `total`-iteration schedule.
 * @param {bigint} total
 * @param {number} base
 * @param {number} points
 * @returns {Float64Array}
 */
export function momentum_curve(total, base, points) {
    const ret = wasm.momentum_curve(total, base, points);
    if (ret[3]) {
        throw takeFromExternrefTable0(ret[2]);
    }
    var v1 = getArrayF64FromWasm0(ret[0], ret[1]).slice();
    wasm.__wbindgen_free(ret[0], ret[1] * 8, 8);
    return v1;
}
function __wbg_get_imports() {
    const import0 = {
        __proto__: null,
        __wbg___wbindgen_throw_41e9ee4f547fc59a: function(arg0, arg1) {
            throw new Error(getStringFromWasm0(arg0, arg1));
        },
        __wbindgen_generic_0000000000000001: function(arg0, arg1) {
            // Cast intrinsic for `Ref(String) -> Externref`.
            const ret = getStringFromWasm0(arg0, arg1);
            return ret;
        },
        __wbindgen_init_externref_table: function() {
            const table = wasm.__wbindgen_externrefs;
            const offset = table.grow(4);
            table.set(0, undefined);
            table.set(offset + 0, undefined);
            table.set(offset + 1, null);
            table.set(offset + 2, true);
            table.set(offset + 3, false);
        },
    };
    return {
        __proto__: null,
        "./vcvrl_web_bg.js": import0,
    };
}

const AnchorViewFinalization = (typeof FinalizationRegistry === 'undefined')
    ? { register: () => {}, unregister: () => {} }
    : new FinalizationRegistry(ptr => wasm.__wbg_anchorview_free(ptr, 1));
const DemoTrainerFinalization = (typeof FinalizationRegistry === 'undefined')
    ? { register: () => {}, unregister: () => {} }
    : new FinalizationRegistry(ptr => wasm.__wbg_demotrainer_free(ptr, 1));
const VolumeFinalization = (typeof FinalizationRegistry === 'undefined')
    ? { register: () => {}, unregister: () => {} }
    : new FinalizationRegistry(ptr => wasm.__wbg_volume_free(ptr, 1));

function getArrayF64FromWasm0(ptr, len) {
    ptr = ptr >>> 0;
    return getFloat64ArrayMemory0().subarray(ptr / 8, ptr / 8 + len);
}

function getArrayU8FromWasm0(ptr, len) {
    ptr = ptr >>> 0;
    return getUint8ArrayMemory0().subarray(ptr / 1, ptr / 1 + len);
}

let cachedFloat64ArrayMemory0 = null;
function getFloat64ArrayMemory0() {
    if (cachedFloat64ArrayMemory0 === null || cachedFloat64ArrayMemory0.byteLength === 0) {
        cachedFloat64ArrayMemory0 = new Float64Array(wasm.memory.buffer);
    }
    return cachedFloat64ArrayMemory0;
}

function getStringFromWasm0(ptr, len) {
    return decodeText(ptr >>> 0, len);
}

let cachedUint8ArrayMemory0 = null;
function getUint8ArrayMemory0() {
    if (cachedUint8ArrayMemory0 === null || cachedUint8ArrayMemory0.byteLength === 0) {
        cachedUint8ArrayMemory0 = new Uint8Array(wasm.memory.buffer);
    }
    return cachedUint8ArrayMemory0;
}

function passStringToWasm0(arg, malloc, realloc) {
    if (realloc === undefined) {
        const buf = cachedTextEncoder.encode(arg);
        const ptr = malloc(buf.length, 1) >>> 0;
        getUint8ArrayMemory0().subarray(ptr, ptr + buf.length).set(buf);
        WASM_VECTOR_LEN = buf.length;
        return ptr;
    }

    let len = arg.length;
    let ptr = malloc(len, 1) >>> 0;

    const mem = getUint8ArrayMemory0();

    let offset = 0;

    for (; offset < len; offset++) {
        const code = arg.charCodeAt(offset);
        if (code > 0x7F) break;
        mem[ptr + offset] = code;
    }
    if (offset !== len) {
        if (offset !== 0) {
            arg = arg.slice(offset);
        }
        ptr = realloc(ptr, len, len = offset + arg.length * 3, 1) >>> 0;
        const view = getUint8ArrayMemory0().subarray(ptr + offset, ptr + len);
        const ret = cachedTextEncoder.encodeInto(arg, view);

        offset += ret.written;
        ptr = realloc(ptr, len, offset, 1) >>> 0;
    }

    WASM_VECTOR_LEN = offset;
    return ptr;
}

function takeFromExternrefTable0(idx) {
    const value = wasm.__wbindgen_externrefs.get(idx);
    wasm.__externref_table_dealloc(idx);
    return value;
}

let cachedTextDecoder = new TextDecoder('utf-8', { ignoreBOM: true, fatal: true });
cachedTextDecoder.decode();
const MAX_SAFARI_DECODE_BYTES = 2146435072;
let numBytesDecoded = 0;
function decodeText(ptr, len) {
    numBytesDecoded += len;
    if (numBytesDecoded >= MAX_SAFARI_DECODE_BYTES) {
        cachedTextDecoder = new TextDecoder('utf-8', { ignoreBOM: true, fatal: true });
        cachedTextDecoder.decode();
        numBytesDecoded = len;
    }
    return cachedTextDecoder.decode(getUint8ArrayMemory0().subarray(ptr, ptr + len));
}

const cachedTextEncoder = new TextEncoder();

if (!('encodeInto' in cachedTextEncoder)) {
    cachedTextEncoder.encodeInto = function (arg, view) {
        const buf = cachedTextEncoder.encode(arg);
        view.set(buf);
        return {
            read: arg.length,
            written: buf.length
        };
    };
}

let WASM_VECTOR_LEN = 0;

let wasmModule, wasmInstance, wasm;
function __wbg_finalize_init(instance, module) {
    wasmInstance = instance;
    wasm = instance.exports;
    wasmModule = module;
    cachedFloat64ArrayMemory0 = null;
    cachedUint8ArrayMemory0 = null;
    wasm.__wbindgen_start();
    return wasm;
}

async function __wbg_load(module, imports) {
    if (typeof Response === 'function' && module instanceof Response) {
        if (!module.ok) {
            throw new Error(`failed to fetch Wasm: ${module.status} ${module.statusText} fetching '${module.url}'`);
        }

        if (typeof WebAssembly.instantiateStreaming === 'function') {
            try {
                return await WebAssembly.instantiateStreaming(module, imports);
            } catch (e) {
                const validResponse = expectedResponseType(module.type);

                if (validResponse && module.headers.get('Content-Type') !== 'application/wasm') {
                    console.warn("`WebAssembly.instantiateStreaming` failed because your server does not serve Wasm with `application/wasm` MIME type. Falling back to `WebAssembly.instantiate` which is slower. Original error:\n", e);

                } else { throw e; }
            }
        }

        const bytes = await module.arrayBuffer();
        return await WebAssembly.instantiate(bytes, imports);
    } else {
        const instance = await WebAssembly.instantiate(module, imports);

        if (instance instanceof WebAssembly.Instance) {
            return { instance, module };
        } else {
            return instance;
        }
    }

    function expectedResponseType(type) {
        switch (type) {
            case 'basic': case 'cors': case 'default': return true;
        }
        return false;
    }
}

function initSync(module) {
    if (wasm !== undefined) return wasm;


    if (module !== undefined) {
        if (Object.getPrototypeOf(module) === Object.prototype) {
            ({module} = module)
        } else {
            console.warn('using deprecated parameters for `initSync()`; pass a single object instead')
        }
    }

    const imports = __wbg_get_imports();
    if (!(module instanceof WebAssembly.Module)) {
        module = new WebAssembly.Module(module);
    }
    const instance = new WebAssembly.Instance(module, imports);
    return __wbg_finalize_init(instance, module);
}

async function __wbg_init(module_or_path) {
    if (wasm !== undefined) return wasm;


    if (module_or_path !== undefined) {
        if (Object.getPrototypeOf(module_or_path) === Object.prototype) {
            ({module_or_path} = module_or_path)
        } else {
            console.warn('using deprecated parameters for the initialization function; pass a single object instead')
        }
    }

    if (module_or_path === undefined) {
        module_or_path = new URL('vcvrl_web_bg.wasm', import.meta.url);
    }
    const imports = __wbg_get_imports();

    if (typeof module_or_path === 'string' || (typeof Request === 'function' && module_or_path instanceof Request) || (typeof URL === 'function' && module_or_path instanceof URL)) {
        module_or_path = fetch(module_or_path);
    }

    const { instance, module } = await __wbg_load(await module_or_path, imports);

    return __wbg_finalize_init(instance, module);
}

export { initSync, __wbg_init as default };

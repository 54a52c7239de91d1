import { ApiClient } from './api.js';
import { ClassesScreen } from './classes.js';
import { FusionScreen } from './fusion.js';
import { LabelingScreen, LabelKey } from './labeling.js';
import { renderClasses, renderFusion, renderLabeling, renderStats } from './render.js';
import { StatsScreen } from './stats.js';
import { EntityRecord, RunRecord } from './types.js';

type Tab = 'labeling' | 'classes' | 'fusion' | 'stats';
const TABS: Tab[] = ['labeling', 'classes', 'fusion', 'stats'];

function byId<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (node === null) throw new Error(`missing element #${id}`);
  return node as T;
}

class App {
  private api: ApiClient;
  private labeling: LabelingScreen | null = null;
  private classes: ClassesScreen | null = null;
  private fusion: FusionScreen | null = null;
  private stats: StatsScreen | null = null;
  private entities = new Map<string, EntityRecord>();
  private runId = '';
  private datasetId = '';

  constructor() {
    const token = localStorage.getItem('kgdedup-token') ?? 'local-dev-token';
    (byId<HTMLInputElement>('token')).value = token;
    this.api = new ApiClient(token);
  }

  currentTab(): Tab {
    const tab = location.hash.replace('#', '') as Tab;
    return TABS.includes(tab) ? tab : 'labeling';
  }

  async connect(): Promise<void> {
    const token = byId<HTMLInputElement>('token').value.trim();
    localStorage.setItem('kgdedup-token', token);
    this.api = new ApiClient(token);
    const runs = await this.api.listRuns();
    const done = runs.filter((r: RunRecord) => r.state === 'done');
    const picker = byId<HTMLSelectElement>('run-picker');
    picker.innerHTML = done
      .map((r) => `<option value="${r.runId}">${r.runId} (${r.datasetIds.join(', ')})</option>`)
      .join('');
    byId('connect-status').textContent = done.length
      ? `${done.length} finished runs`
      : 'no finished runs yet';
    if (done.length) await this.selectRun(done[0].runId, done[0].datasetIds[0]);
  }

  async selectRun(runId: string, datasetId: string): Promise<void> {
    this.runId = runId;
    this.datasetId = datasetId;
    const page = await this.api.getDataset(datasetId, 0, 100_000);
    this.entities = new Map(page.entities.map((e) => [e.id, e]));
    this.labeling = new LabelingScreen(this.api, runId);
    this.classes = new ClassesScreen(this.api, runId, datasetId);
    this.fusion = new FusionScreen(this.api, runId);
    this.stats = new StatsScreen(this.api, runId, datasetId);
    await this.showTab();
  }

  async showTab(): Promise<void> {
    const tab = this.currentTab();
    for (const t of TABS) {
      byId(`tab-${t}`).classList.toggle('active', t === tab);
    }
    if (this.runId === '') {
      byId('screen').innerHTML = '<p class="muted">Connect and pick a run first.</p>';
      return;
    }
    if (tab === 'labeling' && this.labeling) {
      await this.labeling.load();
    } else if (tab === 'classes' && this.classes) {
      await this.classes.load();
    } else if (tab === 'stats' && this.stats) {
      await this.stats.load();
    }
    this.paint();
  }

  paint(): void {
    const tab = this.currentTab();
    const screen = byId('screen');
    if (tab === 'labeling' && this.labeling) {
      screen.innerHTML = renderLabeling(this.labeling, (id) => this.entities.get(id));
      const yes = document.getElementById('supersede-yes');
      const no = document.getElementById('supersede-no');
      if (yes && this.labeling) {
        yes.onclick = () => this.labeling!.confirmSupersede().then(() => this.paint());
      }
      if (no && this.labeling) {
        no.onclick = () => {
          this.labeling!.cancelSupersede();
          this.paint();
        };
      }
    } else if (tab === 'classes' && this.classes) {
      screen.innerHTML = renderClasses(this.classes);
    } else if (tab === 'fusion' && this.fusion) {
      screen.innerHTML = renderFusion(this.fusion);
      this.wireOverridePickers();
    } else if (tab === 'stats' && this.stats) {
      screen.innerHTML = renderStats(this.stats);
    }
  }

  /** Clicking a decision row opens a picker restricted to its input values. */
  private wireOverridePickers(): void {
    const fusion = this.fusion;
    if (fusion === null) return;
    for (const row of document.querySelectorAll<HTMLTableRowElement>('tr[data-fused]')) {
      row.onclick = async () => {
        const fusedId = row.dataset.fused!;
        const property = row.dataset.prop!;
        const options = fusion.overrideOptions(fusedId, property);
        if (options.length === 0) return;
        const choice = prompt(
          `Override ${property} with one of:\n${options.join('\n')}`,
          options[0],
        );
        if (choice === null) return;
        await fusion.submitOverride(fusedId, property, choice);
        this.paint();
      };
    }
  }

  async handleKey(event: KeyboardEvent): Promise<void> {
    if (this.currentTab() !== 'labeling' || this.labeling === null) return;
    if ((event.target as HTMLElement).tagName === 'INPUT') return;
    if (event.key === 'y' || event.key === 'n' || event.key === 'r') {
      await this.labeling.labelCurrent(event.key as LabelKey);
      if (this.labeling.candidates.length === 0 && this.labeling.pendingConflict === null) {
        await this.labeling.load();
      }
      this.paint();
    }
  }

  wire(): void {
    byId('connect').onclick = () => {
      this.connect().catch((err) => {
        byId('connect-status').textContent = String(err.message ?? err);
      });
    };
    byId<HTMLSelectElement>('run-picker').onchange = (e) => {
      const picker = e.target as HTMLSelectElement;
      const label = picker.selectedOptions[0]?.textContent ?? '';
      const datasetId = label.match(/\(([^),]+)/)?.[1] ?? this.datasetId;
      this.selectRun(picker.value, datasetId);
    };
    window.addEventListener('hashchange', () => this.showTab());
    document.addEventListener('keydown', (e) => this.handleKey(e));
    byId('class-filter').oninput = (e) => {
      if (this.classes) {
        this.classes.filterText = (e.target as HTMLInputElement).value;
        if (this.currentTab() === 'classes') this.paint();
      }
    };
    byId('toggle-singletons').onclick = async () => {
      if (this.classes) {
        await this.classes.toggleSingletons();
        if (this.currentTab() === 'classes') this.paint();
      }
    };
    byId('start-fusion').onclick = async () => {
      if (this.fusion) {
        await this.fusion.start();
        location.hash = 'fusion';
        this.paint();
      }
    };
  }
}

const app = new App();
app.wire();

// Artifact schema mirrors. The UI never recomputes pipeline math; these
// shapes exist only to display fetched documents and to address renders.

export type Vec3 = [number, number, number];

export interface CameraDict {
  position: Vec3;
  look_at: Vec3;
  up: Vec3;
  vertical_fov: number;
}

export interface ViewpointDict {
  index: number;
  direction: Vec3;
  position: Vec3;
}

export interface TfControlPoint {
  value: number;
  color: Vec3;
  opacity: number;
}

export interface TfDict {
  schema_version: number;
  mode: string;
  width: number;
  control_points: TfControlPoint[];
}

export interface ViewsDoc {
  schema_version: number;
  sphere: { center: Vec3; radius: number };
  intermediate_resolution: number;
  lattice: ViewpointDict[];
  selection: { ranked: number[]; anchors: number[]; avoid: number[] };
}

export interface TrajectoryDoc {
  schema_version: number;
  anchor_indices: number[];
  anchors: ViewpointDict[];
  samples_per_segment: number;
  dense_path: CameraDict[];
}

export interface RunDoc {
  schema_version: number;
  status: string;
  input: string;
  meta: string;
  final_view_index: number;
  config: Record<string, unknown>;
  census: { chats: number; by_role: Record<string, { calls: number }> };
  degradations: string[];
}

export interface RunHandle {
  run_id: string;
  state: string;
  artifacts: string[];
  error?: string | null;
}

export interface RenderBody {
  camera?: CameraDict;
  camera_index?: number;
  tf?: TfDict;
  resolution?: number;
}
